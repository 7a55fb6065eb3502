"""Finite-dimensional C*-correspondences over B and the edge correspondence.

A module space carries B-valued inner products and commuting left/right
actions in coordinates.  Correspondences are module spaces whose basis is
orthonormal for the scalar form psi(<.,.>_B); they are produced from a
spanning family by diagonalizing the scalar Gram matrix and discarding its
kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .blocks import (
    DEFAULT_TOL,
    AlgebraElement,
    BlockStructure,
    DeltaState,
    TensorElement,
)
from .errors import (
    MismatchedBase,
    NotCompletelyPositive,
    NotGenerating,
    NotQuantumAdjacency,
    ShapeMismatch,
)
from .graphs import (
    LinearMapOnB,
    QuantumGraph,
    adjoint_map,
    edge_indicator,
    is_completely_positive,
    quantum_sources_sinks,
    schur_residual,
)

GRAM_CUTOFF_RTOL = 1e-10


@dataclass(frozen=True)
class ModuleSpace:
    """Coordinate model of a B-bimodule with a B-valued inner product.

    binner[a, b] are the canonical coordinates of <u_a, u_b>_B; lmul[p] and
    rmul[p] are the matrices of the unit b_p acting on the left and right.
    """

    structure: BlockStructure
    psi: DeltaState
    binner: np.ndarray  # (M, M, dim)
    lmul: np.ndarray  # (dim, M, M)
    rmul: np.ndarray  # (dim, M, M)

    @property
    def size(self) -> int:
        return self.binner.shape[0]

    @cached_property
    def scalar_gram(self) -> np.ndarray:
        """Scalar form psi(<u_a, u_b>_B) on the coordinate spanning set."""
        return self.binner @ self.psi.psi_vec

    def b_inner_coords(self, xi: np.ndarray, eta: np.ndarray) -> np.ndarray:
        """Canonical coordinates of <xi, eta>_B."""
        return np.einsum("a,b,abd->d", xi.conj(), eta, self.binner)

    def left_act(self, x: AlgebraElement, xi: np.ndarray) -> np.ndarray:
        return np.einsum("p,pab,b->a", x.vec, self.lmul, xi)

    def right_act(self, xi: np.ndarray, x: AlgebraElement) -> np.ndarray:
        return np.einsum("p,pab,b->a", x.vec, self.rmul, xi)


@dataclass(frozen=True)
class Correspondence(ModuleSpace):
    """Module space whose basis is scalar-orthonormal (Gram kernel removed).

    ambient/basis_ambient record how basis vectors sit inside the space the
    correspondence was built from; generator, when set, holds the quotient
    coordinates of the distinguished generating vector (the edge indicator
    for edge correspondences).
    """

    ambient: ModuleSpace | None = None
    basis_ambient: np.ndarray | None = None  # (n, M)
    generator: np.ndarray | None = None
    closure_residual: float = 0.0

    @property
    def dim_module(self) -> int:
        return self.size

    def project(self, ambient_vec: np.ndarray) -> np.ndarray:
        """Quotient coordinates of an ambient vector (scalar-orthogonal projection)."""
        if self.ambient is None or self.basis_ambient is None:
            raise ShapeMismatch("correspondence carries no ambient embedding")
        return self.basis_ambient.conj() @ (self.ambient.scalar_gram @ ambient_vec)

    def vector(self, coords: np.ndarray) -> "CorrVector":
        return CorrVector(self, np.asarray(coords, dtype=complex))


@dataclass(frozen=True)
class CorrVector:
    """Vector in a correspondence, given by coefficients over its basis."""

    module: Correspondence
    coords: np.ndarray

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=complex)
        if coords.shape != (self.module.size,):
            raise ShapeMismatch(f"coordinate vector has shape {coords.shape}")
        object.__setattr__(self, "coords", coords)

    def norm(self) -> float:
        g = self.module.scalar_gram
        return float(np.sqrt(abs(self.coords.conj() @ g @ self.coords)))


def from_spanning(
    ambient: ModuleSpace,
    spanning: np.ndarray,
    gram_rtol: float = GRAM_CUTOFF_RTOL,
    psd_error: type[Exception] | None = None,
) -> Correspondence:
    """Quotient the span of `spanning` by the scalar Gram kernel.

    Basis vectors are the Gram eigenvectors above the relative cutoff,
    rescaled to unit scalar norm.  When the Gram has a significantly
    negative eigenvalue, raises `psd_error` (the semi-inner product is not
    positive).
    """
    spanning = np.asarray(spanning, dtype=complex)
    S = ambient.scalar_gram
    G = spanning.conj() @ S @ spanning.T
    G = (G + G.conj().T) / 2
    evals, evecs = np.linalg.eigh(G)
    top = float(evals.max(initial=0.0))
    if evals.size and float(evals.min()) < -1e-8 * max(1.0, top):
        err = psd_error or NotCompletelyPositive
        raise err(f"scalar Gram min eigenvalue {evals.min():.3e}")
    keep = evals > gram_rtol * max(top, 1e-300)
    lam = evals[keep]
    U = evecs[:, keep]
    basis = (U / np.sqrt(lam)).T @ spanning  # (n, M), scalar-orthonormal
    n = basis.shape[0]
    dim = ambient.structure.dim

    half = np.tensordot(basis.conj(), ambient.binner, axes=(1, 0))  # (n, M, dim)
    binner = np.tensordot(half, basis, axes=([1], [1])).transpose(0, 2, 1)
    proj = basis.conj() @ S  # (n, M): scalar projection onto the basis
    lmul = np.stack([proj @ ambient.lmul[p] @ basis.T for p in range(dim)])
    rmul = np.stack([proj @ ambient.rmul[p] @ basis.T for p in range(dim)])

    # how far the span fails to be invariant under the actions
    closure = 0.0
    for mats, amb in ((lmul, ambient.lmul), (rmul, ambient.rmul)):
        for p in range(dim):
            moved = amb[p] @ basis.T  # columns are b_p . v_i in ambient coordinates
            back = basis.T @ mats[p]
            diff = moved - back
            sq = np.real(np.sum(diff.conj() * (S @ diff), axis=0))
            closure = max(closure, float(np.sqrt(max(0.0, float(sq.max(initial=0.0))))))

    return Correspondence(
        structure=ambient.structure,
        psi=ambient.psi,
        binner=binner,
        lmul=lmul,
        rmul=rmul,
        ambient=ambient,
        basis_ambient=basis,
        closure_residual=closure,
    )


def algebra_module(psi: DeltaState) -> ModuleSpace:
    """B as a correspondence over itself: <x, y>_B = x* y, regular actions."""
    st = psi.structure
    mt = st.mul_tensor
    binner = mt[:, st.star_perm, :].transpose(1, 2, 0).astype(complex)
    lmul = mt.transpose(1, 0, 2).astype(complex)  # lmul[p] = mt[:, p, :]
    rmul = mt.transpose(2, 0, 1).astype(complex)  # rmul[p] = mt[:, :, p]
    return ModuleSpace(st, psi, binner, lmul, rmul)


def trivial_correspondence(psi: DeltaState) -> Correspondence:
    """B as a correspondence, quotient-normalized (Gram is automatically PD)."""
    amb = algebra_module(psi)
    return from_spanning(amb, np.eye(psi.structure.dim, dtype=complex))


def tensor_square_module(psi: DeltaState, phi_matrix: np.ndarray) -> ModuleSpace:
    """B (x) B with <a (x) b, c (x) d>_B = b* Phi(a* c) d for a linear Phi."""
    st = psi.structure
    d = st.dim
    mt = st.mul_tensor
    star = st.star_perm
    # T1[p, r] = Phi(b_p* b_r) coordinates
    A1 = mt[:, star, :].transpose(1, 2, 0)  # (p, r, u)
    T1 = A1 @ np.asarray(phi_matrix, dtype=complex).T  # (p, r, v)
    # LR[q, s, w, v]: coordinates of b_q* z b_s picked from z-coordinate v
    LR = np.einsum("wqm,mvs->qswv", mt[:, star, :], mt, optimize=True)
    binner = np.einsum("prv,qswv->pqrsw", T1, LR, optimize=True).reshape(d * d, d * d, d)
    eye = np.eye(d)
    lmul = np.stack([np.kron(mt[:, p, :], eye) for p in range(d)]).astype(complex)
    rmul = np.stack([np.kron(eye, mt[:, :, p]) for p in range(d)]).astype(complex)
    return ModuleSpace(st, psi, binner, lmul, rmul)


def psi_tensor_module(psi: DeltaState) -> ModuleSpace:
    """The ambient B (x)_psi B: Phi = psi(.) 1."""
    st = psi.structure
    phi = np.outer(st.unit_vector, psi.psi_vec)
    return tensor_square_module(psi, phi)


def build_edge_correspondence(
    G: QuantumGraph, tol: float = DEFAULT_TOL
) -> Correspondence:
    """E_G = B . eps . B inside B (x)_psi B, with the indicator as generator."""
    ok, min_eig = is_completely_positive(G.psi, G.adjacency)
    if not ok:
        raise NotCompletelyPositive(f"Choi min eigenvalue {min_eig:.3e}")
    st = G.structure
    amb = psi_tensor_module(G.psi)
    eps = edge_indicator(G)
    mt = st.mul_tensor
    spanning = np.empty((st.dim * st.dim, st.dim * st.dim), dtype=complex)
    for p in range(st.dim):
        L = mt[:, p, :]
        for q in range(st.dim):
            R = mt[:, :, q]
            spanning[p * st.dim + q] = (L @ eps.coeff @ R.T).ravel()
    E = from_spanning(amb, spanning)
    gen = E.project(eps.coeff.ravel())
    return Correspondence(
        structure=E.structure,
        psi=E.psi,
        binner=E.binner,
        lmul=E.lmul,
        rmul=E.rmul,
        ambient=E.ambient,
        basis_ambient=E.basis_ambient,
        generator=gen,
        closure_residual=E.closure_residual,
    )


def b_inner(xi: CorrVector, eta: CorrVector, E: Correspondence) -> AlgebraElement:
    """B-valued inner product <xi, eta>_B of two module vectors."""
    if xi.module is not E or eta.module is not E:
        if xi.module.size != E.size or eta.module.size != E.size:
            raise ShapeMismatch("vectors over a different correspondence")
    return AlgebraElement.from_vector(E.structure, E.b_inner_coords(xi.coords, eta.coords))


def _gns_orthonormal(vectors: np.ndarray, gram: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Orthonormalize rows of `vectors` for the weighted inner product `gram`."""
    if vectors.size == 0:
        return vectors.reshape(0, gram.shape[0])
    G = vectors.conj() @ np.diag(gram) @ vectors.T
    G = (G + G.conj().T) / 2
    evals, evecs = np.linalg.eigh(G)
    keep = evals > rtol * max(float(evals.max(initial=0.0)), 1e-300)
    return (evecs[:, keep] / np.sqrt(evals[keep])).T @ vectors


def _gns_projector(vectors: np.ndarray, gram: np.ndarray) -> np.ndarray:
    V = _gns_orthonormal(vectors, gram)
    return V.T @ V.conj() @ np.diag(gram)


def left_kernel(G: QuantumGraph, tol: float = DEFAULT_TOL) -> dict:
    """Left-action kernel of E_G, computed directly and via (B A*(B) B)^perp.

    Returns the numerical null space, the block-ideal complement predicted
    by the adjoint of A, and the distance between the two subspaces.
    """
    st = G.structure
    E = build_edge_correspondence(G)
    # direct: x with x . v_beta = 0 for every basis vector
    K = E.lmul.reshape(st.dim, -1).T  # ((c,beta), p)
    if K.shape[0]:
        _, svals, vh = np.linalg.svd(K)
        cutoff = tol * max(float(svals.max(initial=0.0)), 1.0)
        null_dim = int(np.sum(svals <= cutoff)) + (st.dim - len(svals))
        kernel = vh.conj()[st.dim - null_dim :] if null_dim else np.zeros((0, st.dim))
    else:
        kernel = np.eye(st.dim, dtype=complex)

    # ideal generated by range(A*): blocks where A* has a nonzero row slab
    Astar = adjoint_map(G.adjacency, G.psi)
    complement_rows = []
    complement_blocks = []
    for a in range(st.num_blocks):
        lo, hi = st.offsets[a], st.offsets[a + 1]
        if np.linalg.norm(Astar.matrix[lo:hi, :]) <= tol:
            complement_blocks.append(a)
            complement_rows.extend(np.eye(st.dim, dtype=complex)[lo:hi])
    perp = np.array(complement_rows).reshape(-1, st.dim)

    g = G.psi.gram_diag
    dist = float(np.linalg.norm(_gns_projector(kernel, g) - _gns_projector(perp, g)))
    return {
        "kernel_basis": kernel,
        "kernel_dim": kernel.shape[0],
        "perp_basis": perp,
        "perp_blocks": complement_blocks,
        "subspace_distance": dist,
    }


def fullness_ideal(G: QuantumGraph, tol: float = DEFAULT_TOL) -> tuple[list[int], bool]:
    """Blocks spanning B . A(B) . B and whether the correspondence is full."""
    st = G.structure
    A = G.adjacency.matrix
    blocks = [
        a
        for a in range(st.num_blocks)
        if np.linalg.norm(A[st.offsets[a] : st.offsets[a + 1], :]) > tol
    ]
    return blocks, len(blocks) == st.num_blocks


def rank_one_operator(E: ModuleSpace, u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Matrix of theta_{u,w}: v -> u . <w, v>_B on module coordinates."""
    c = np.einsum("i,ibd->db", w.conj(), E.binner)  # <w, v_beta>_B coords
    ru = np.einsum("dab,b->da", E.rmul, u)  # u . b_d
    return np.einsum("db,da->ab", c, ru)


def compact_decomposition_residual(G: QuantumGraph) -> float:
    """Residual of f_ij . xi = sum_k theta_{f_ik.eps, f_jk.eps}(xi) on E_G."""
    from .blocks import adapted_unit

    st = G.structure
    E = build_edge_correspondence(G)
    gen = E.generator
    worst = 0.0
    for a, n in enumerate(st.sizes):
        creations = [E.left_act(adapted_unit(a, i, k, G.psi), gen) for i in range(n) for k in range(n)]

        def vec(i, k):
            return creations[i * n + k]

        for i in range(n):
            for j in range(n):
                f = adapted_unit(a, i, j, G.psi)
                lhs = np.einsum("p,pab->ab", f.vec, E.lmul)
                rhs = sum(rank_one_operator(E, vec(i, k), vec(j, k)) for k in range(n))
                diff = lhs - rhs
                worst = max(worst, float(np.abs(np.linalg.norm(diff, axis=0)).max(initial=0.0)))
    return worst


def cp_correspondence(
    G: QuantumGraph, tol: float = DEFAULT_TOL
) -> tuple[Correspondence, float]:
    """B (x)_A B with the inner product b* A(a* c) d, plus the isomorphism residual.

    The canonical map x . eps . y -> (1/delta)(x (x) y) must preserve
    B-valued inner products; the returned residual is its worst defect over
    generator pairs.
    """
    ok, min_eig = is_completely_positive(G.psi, G.adjacency)
    if not ok:
        raise NotCompletelyPositive(f"Choi min eigenvalue {min_eig:.3e}")
    st = G.structure
    amb = tensor_square_module(G.psi, G.adjacency.matrix)
    F = from_spanning(amb, np.eye(st.dim * st.dim, dtype=complex))
    E = build_edge_correspondence(G)

    mt = st.mul_tensor
    delta = np.sqrt(G.delta_sq)
    d2 = st.dim * st.dim
    gE = np.empty((d2, E.size), dtype=complex)
    hF = np.empty((d2, F.size), dtype=complex)
    eye2 = np.eye(d2, dtype=complex)
    for p in range(st.dim):
        for q in range(st.dim):
            idx = p * st.dim + q
            xi = E.left_act(
                AlgebraElement.from_vector(st, np.eye(st.dim, dtype=complex)[p]),
                E.right_act(E.generator, AlgebraElement.from_vector(st, np.eye(st.dim, dtype=complex)[q])),
            )
            gE[idx] = xi
            hF[idx] = F.project(eye2[idx]) / delta
    innerE = np.einsum("xi,yj,ijd->xyd", gE.conj(), gE, E.binner, optimize=True)
    innerF = np.einsum("xi,yj,ijd->xyd", hF.conj(), hF, F.binner, optimize=True)
    residual = float(np.abs(innerE - innerF).max(initial=0.0))
    return F, residual


@dataclass(frozen=True)
class RecognitionResult:
    graph: QuantumGraph
    module_dim: int
    iso_residual: float


def recognize(
    xi,
    psi: DeltaState,
    module: Correspondence | None = None,
    tol: float = DEFAULT_TOL,
) -> RecognitionResult:
    """Decide whether a cyclic vector generates a quantum edge correspondence.

    xi is a TensorElement in B (x)_psi B, or a CorrVector when `module` is
    given.  The candidate adjacency is A(x) = delta^2 (psi (x) 1)(x . xi) in
    the ambient tensor model and A(x) = delta^2 <xi, x . xi>_B in a cyclic
    module; it must be Schur-idempotent.  On success returns the recovered
    graph together with the inner-product defect of the identification
    x . xi . y -> x . eps . y.
    """
    st = psi.structure
    if module is None:
        if not isinstance(xi, TensorElement):
            raise ShapeMismatch("expected a TensorElement without a module")
        amb = psi_tensor_module(psi)
        coords = xi.coeff.ravel()
        mod_space: ModuleSpace = amb
    else:
        coords = xi.coords if isinstance(xi, CorrVector) else np.asarray(xi, dtype=complex)
        mod_space = module

    eye = np.eye(st.dim, dtype=complex)
    units = [AlgebraElement.from_vector(st, eye[p]) for p in range(st.dim)]
    spanning = np.stack(
        [
            mod_space.left_act(units[p], mod_space.right_act(coords, units[q]))
            for p in range(st.dim)
            for q in range(st.dim)
        ]
    )
    S = mod_space.scalar_gram
    gram = spanning.conj() @ S @ spanning.T
    evals = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
    span_rank = int(np.sum(evals > GRAM_CUTOFF_RTOL * max(float(evals.max(initial=0.0)), 1e-300)))
    if module is not None and span_rank < module.size:
        raise NotGenerating(
            f"xi generates a {span_rank}-dimensional submodule of dimension-{module.size} module"
        )

    if module is None:
        cols = [
            psi.delta_sq
            * TensorElement(st, (mod_space.left_act(units[p], coords)).reshape(st.dim, st.dim))
            .partial_psi_left(psi)
            .vec
            for p in range(st.dim)
        ]
    else:
        cols = [
            psi.delta_sq
            * mod_space.b_inner_coords(coords, mod_space.left_act(units[p], coords))
            for p in range(st.dim)
        ]
    A = LinearMapOnB(st, np.column_stack(cols))
    res = schur_residual(psi, A)
    if res > tol:
        raise NotQuantumAdjacency(f"induced map has Schur residual {res:.3e}")
    G = QuantumGraph.build(psi, A, tol=tol)
    E = build_edge_correspondence(G)

    gX = spanning
    gE = np.stack(
        [
            E.left_act(units[p], E.right_act(E.generator, units[q]))
            for p in range(st.dim)
            for q in range(st.dim)
        ]
    )
    innerX = np.einsum("xa,yb,abd->xyd", gX.conj(), gX, mod_space.binner, optimize=True)
    innerE = np.einsum("xi,yj,ijd->xyd", gE.conj(), gE, E.binner, optimize=True)
    iso = float(np.abs(innerX - innerE).max(initial=0.0))
    return RecognitionResult(graph=G, module_dim=span_rank, iso_residual=iso)


def faithful_full_report(G: QuantumGraph, tol: float = DEFAULT_TOL) -> dict:
    """Faithfulness/fullness of E_G with the source/sink cross-check."""
    kern = left_kernel(G, tol)
    ideal_blocks, full = fullness_ideal(G, tol)
    sources, sinks = quantum_sources_sinks(G, tol)
    return {
        "faithful": kern["kernel_dim"] == 0,
        "full": full,
        "kernel_dim": kern["kernel_dim"],
        "ideal_blocks": ideal_blocks,
        "subspace_distance": kern["subspace_distance"],
        "sources": sources,
        "sinks": sinks,
    }
