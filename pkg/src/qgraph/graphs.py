"""Quantum adjacency matrices, edge indicators, and their verification.

A quantum graph is (B, psi, A) with A Schur-idempotent: m (A x A) m* =
delta^2 A.  This module validates that condition, builds the quantum edge
indicator, cross-checks complete positivity two independent ways, finds
quantum sources/sinks, and evaluates the homomorphism and quantum
isomorphism covariance residuals.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .blocks import (
    DEFAULT_TOL,
    AlgebraElement,
    BlockStructure,
    DeltaState,
    TensorElement,
    comultiply,
    modular_half_matrix,
    sharp,
)
from .errors import (
    NotCompletelyPositive,
    NotIdempotent,
    NotModularSelfAdjoint,
    NotQuantumAdjacency,
    ShapeMismatch,
)

CHOI_EIG_RTOL = 1e-10


@dataclass(frozen=True)
class LinearMapOnB:
    """Linear map on B stored as a matrix on canonical coordinates."""

    structure: BlockStructure
    matrix: np.ndarray

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape != (self.structure.dim, self.structure.dim):
            raise ShapeMismatch(f"map matrix has shape {mat.shape}")
        object.__setattr__(self, "matrix", mat)

    def __call__(self, x: AlgebraElement) -> AlgebraElement:
        if x.structure != self.structure:
            raise ShapeMismatch("element over a different block structure")
        return AlgebraElement.from_vector(self.structure, self.matrix @ x.vec)

    @classmethod
    def identity(cls, structure: BlockStructure) -> "LinearMapOnB":
        return cls(structure, np.eye(structure.dim))

    def adapted_coefficients(self, psi: DeltaState) -> np.ndarray:
        """Coefficient matrix in the adapted-unit basis, by diagonal rescaling.

        A(f_p) = sum_q coeff[q, p] f_q with f_p = e_p / sqrt(w_i w_j).
        """
        scale = np.sqrt(psi.weight_of_row * psi.gram_diag)
        return self.matrix * (scale[:, None] / scale[None, :])


def _schur_square_matrix(psi: DeltaState, A: LinearMapOnB) -> np.ndarray:
    """Matrix of x -> m (A x A) m*(x) on canonical coordinates."""
    st = psi.structure
    cols = []
    for p in range(st.dim):
        unit = AlgebraElement.from_vector(st, np.eye(st.dim, dtype=complex)[p])
        t = comultiply(unit, psi)
        t = TensorElement(st, A.matrix @ t.coeff @ A.matrix.T)
        cols.append(t.multiply_down().vec)
    return np.column_stack(cols)


def schur_residual(psi: DeltaState, A: LinearMapOnB) -> float:
    """Frobenius residual of m (A x A) m* = delta^2 A over the standard basis."""
    if A.structure != psi.structure:
        raise ShapeMismatch("map and state over different structures")
    return float(
        np.linalg.norm(_schur_square_matrix(psi, A) - psi.delta_sq * A.matrix)
    )


@dataclass(frozen=True)
class QuantumGraph:
    """Validated triple (B, psi, A); construction enforces Schur idempotency."""

    structure: BlockStructure
    psi: DeltaState
    adjacency: LinearMapOnB
    schur_residual_cache: float = 0.0

    @classmethod
    def build(
        cls,
        psi: DeltaState,
        adjacency: LinearMapOnB,
        tol: float = DEFAULT_TOL,
    ) -> "QuantumGraph":
        res = schur_residual(psi, adjacency)
        if res > tol:
            raise NotQuantumAdjacency(
                f"Schur idempotency residual {res:.3e} exceeds {tol:.1e}"
            )
        return cls(psi.structure, psi, adjacency, res)

    @property
    def delta_sq(self) -> float:
        return self.psi.delta_sq


def edge_indicator(G: QuantumGraph) -> TensorElement:
    """Quantum edge indicator eps = delta^-2 (1 x A) m*(1)."""
    one = AlgebraElement.unit(G.structure)
    t = comultiply(one, G.psi)
    return (1.0 / G.delta_sq) * t.apply_second(G.adjacency.matrix)


def indicator_properties(G: QuantumGraph) -> dict[str, float]:
    """Residuals of the three defining properties of the edge indicator.

    r1: A(x) = delta^2 (psi x 1)(x . eps) over the standard basis.
    r2: eps # eps = eps.
    r3: self-adjointness of (sigma_{i/2} x 1)(eps).
    """
    st, psi = G.structure, G.psi
    eps = edge_indicator(G)
    r1 = 0.0
    for p in range(st.dim):
        x = AlgebraElement.from_vector(st, np.eye(st.dim, dtype=complex)[p])
        lhs = G.adjacency(x)
        rhs = G.delta_sq * eps.left_mul(x).partial_psi_left(psi)
        r1 = max(r1, (lhs - rhs).norm())
    r2 = (sharp(eps, eps) - eps).norm()
    twisted = eps.apply_first(modular_half_matrix(psi))
    r3 = (twisted - twisted.dagger()).norm()
    return {"r1": r1, "r2": r2, "r3": r3}


def choi_blocks(psi_or_structure, A: LinearMapOnB) -> list[np.ndarray]:
    """Per-block-pair Choi matrices of A.

    For source block a and target block b the Choi slab is the
    (N_a N_b) x (N_a N_b) matrix H[(i,r),(j,s)] = A(e_ij^{(a)})^{(b)}_{rs};
    A is completely positive iff every slab is positive semidefinite.
    """
    st = A.structure
    blocks = []
    for a, na in enumerate(st.sizes):
        for b, nb in enumerate(st.sizes):
            H = np.zeros((na * nb, na * nb), dtype=complex)
            for i in range(na):
                for j in range(na):
                    img = A.matrix[:, st.flat_index(a, i, j)]
                    lo = st.offsets[b]
                    slab = img[lo : lo + nb * nb].reshape(nb, nb)
                    H[i * nb : (i + 1) * nb, j * nb : (j + 1) * nb] = slab
            blocks.append(H)
    return blocks


def is_completely_positive(
    psi: DeltaState, A: LinearMapOnB, rtol: float = CHOI_EIG_RTOL
) -> tuple[bool, float]:
    """Choi positivity test; returns (flag, min eigenvalue over all slabs)."""
    if A.structure != psi.structure:
        raise ShapeMismatch("map and state over different structures")
    min_eig = np.inf
    max_eig = 0.0
    for H in choi_blocks(psi, A):
        herm_defect = np.linalg.norm(H - H.conj().T)
        if herm_defect > 1e-8 * max(1.0, np.linalg.norm(H)):
            return False, -float(np.linalg.norm(H))
        evals = np.linalg.eigvalsh((H + H.conj().T) / 2)
        min_eig = min(min_eig, float(evals.min()))
        max_eig = max(max_eig, float(evals.max()) if evals.size else 0.0)
    ok = min_eig >= -rtol * max(1.0, max_eig)
    return bool(ok), float(min_eig)


def adjacency_from_indicator(
    xi: TensorElement, psi: DeltaState, tol: float = DEFAULT_TOL
) -> LinearMapOnB:
    """Recover A_xi(x) = delta^2 (psi x 1)(x . xi) from a candidate indicator.

    Requires xi # xi = xi and modular self-adjointness; the result is then a
    completely positive quantum adjacency matrix and the indicator round
    trips.
    """
    st = psi.structure
    if xi.structure != st:
        raise ShapeMismatch("tensor over a different block structure")
    idem = (sharp(xi, xi) - xi).norm()
    if idem > tol * max(1.0, xi.norm()):
        raise NotIdempotent(f"xi # xi - xi has norm {idem:.3e}")
    twisted = xi.apply_first(modular_half_matrix(psi))
    sa = (twisted - twisted.dagger()).norm()
    if sa > tol * max(1.0, xi.norm()):
        raise NotModularSelfAdjoint(f"modular self-adjointness defect {sa:.3e}")
    cols = []
    for p in range(st.dim):
        x = AlgebraElement.from_vector(st, np.eye(st.dim, dtype=complex)[p])
        cols.append(psi.delta_sq * xi.left_mul(x).partial_psi_left(psi).vec)
    return LinearMapOnB(st, np.column_stack(cols))


def quantum_sources_sinks(
    G: QuantumGraph, tol: float = DEFAULT_TOL
) -> tuple[list[int], list[int]]:
    """Indices of source blocks (in ker A) and sink blocks (orthogonal to ran A)."""
    st = G.structure
    A = G.adjacency.matrix
    sources, sinks = [], []
    for a in range(st.num_blocks):
        lo, hi = st.offsets[a], st.offsets[a + 1]
        if np.linalg.norm(A[:, lo:hi]) <= tol:
            sources.append(a)
        if np.linalg.norm(A[lo:hi, :]) <= tol:
            sinks.append(a)
    return sources, sinks


def adjoint_map(A: LinearMapOnB, psi: DeltaState) -> LinearMapOnB:
    """Adjoint A* for the GNS inner product: <A x, y> = <x, A* y>."""
    if A.structure != psi.structure:
        raise ShapeMismatch("map and state over different structures")
    g = psi.gram_diag
    mat = (A.matrix.conj().T * g[None, :]) / g[:, None]
    return LinearMapOnB(A.structure, mat)


def homomorphism_check(G: QuantumGraph, tol: float = DEFAULT_TOL) -> dict[str, float]:
    """Multiplicativity of A versus the indicator-shift identity.

    Returns max basis-pair residuals of A(xy) - A(x)A(y) and of
    (xy) . eps - x . eps . A(y); the two vanish together.
    """
    ok, min_eig = is_completely_positive(G.psi, G.adjacency)
    if not ok:
        raise NotCompletelyPositive(f"Choi min eigenvalue {min_eig:.3e}")
    st = G.structure
    eps = edge_indicator(G)
    mult = 0.0
    shift = 0.0
    eye = np.eye(st.dim, dtype=complex)
    for p in range(st.dim):
        x = AlgebraElement.from_vector(st, eye[p])
        for q in range(st.dim):
            y = AlgebraElement.from_vector(st, eye[q])
            xy = x * y
            mult = max(mult, (G.adjacency(xy) - G.adjacency(x) * G.adjacency(y)).norm())
            lhs = eps.left_mul(xy)
            rhs = eps.left_mul(x).right_mul(G.adjacency(y))
            shift = max(shift, (lhs - rhs).norm())
    return {"multiplicativity": mult, "indicator_shift": shift}


class OperatorValuedMap:
    """Linear map B1 -> B2 (x) M_h given by per-unit coordinate images.

    images[p] has shape (dim2, h, h): the image of unit b_p is
    sum_q b_q (x) images[p][q].
    """

    def __init__(self, source: BlockStructure, target: BlockStructure, images: np.ndarray):
        images = np.asarray(images, dtype=complex)
        if images.ndim != 4 or images.shape[0] != source.dim or images.shape[1] != target.dim:
            raise ShapeMismatch(f"theta images have shape {images.shape}")
        if images.shape[2] != images.shape[3] or images.shape[2] < 1:
            raise ShapeMismatch("auxiliary factor must be square and nonempty")
        self.source = source
        self.target = target
        self.images = images
        self.h = images.shape[2]

    @classmethod
    def identity(cls, structure: BlockStructure, h: int = 1) -> "OperatorValuedMap":
        d = structure.dim
        images = np.zeros((d, d, h, h), dtype=complex)
        for p in range(d):
            images[p, p] = np.eye(h)
        return cls(structure, structure, images)

    def apply_vec(self, vec: np.ndarray) -> np.ndarray:
        return np.einsum("p,pqkl->qkl", vec, self.images)

    def product(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Multiply two elements of B2 (x) M_h in coordinates."""
        M = self.target.mul_tensor
        return np.einsum("uqr,qkl,rlm->ukm", M, u, v, optimize=True)

    def star(self, u: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        out[self.target.star_perm] = np.conj(np.swapaxes(u, -1, -2))
        return out


def quantum_isomorphism_residual(
    G1: QuantumGraph, G2: QuantumGraph, theta: OperatorValuedMap
) -> dict[str, float]:
    """Residuals of the quantum-isomorphism covariance conditions for theta.

    Reports: *-homomorphism defect of theta (unitality, multiplicativity,
    star), state covariance (psi2 x id) theta = psi1(.) 1, and adjacency
    covariance (A2 x id) theta = theta A1.
    """
    st1, st2 = G1.structure, G2.structure
    if theta.source != st1 or theta.target != st2:
        raise ShapeMismatch("theta does not map B1 into B2 (x) M_h")
    h = theta.h
    eye = np.eye(st1.dim, dtype=complex)

    hom = np.linalg.norm(
        theta.apply_vec(st1.unit_vector)
        - OperatorValuedMap.identity(st2, h).apply_vec(st2.unit_vector)
    )
    for p in range(st1.dim):
        ip = theta.images[p]
        hom = max(
            hom,
            float(np.linalg.norm(theta.apply_vec(eye[st1.star_perm[p]]) - theta.star(ip))),
        )
        for q in range(st1.dim):
            prod_vec = st1.mul_tensor[:, p, q].astype(complex)
            lhs = theta.apply_vec(prod_vec)
            rhs = theta.product(ip, theta.images[q])
            hom = max(hom, float(np.linalg.norm(lhs - rhs)))

    state = 0.0
    adj = 0.0
    for p in range(st1.dim):
        img = theta.images[p]
        sliced = np.einsum("q,qkl->kl", G2.psi.psi_vec, img)
        expected = G1.psi.psi_vec[p] * np.eye(h)
        state = max(state, float(np.linalg.norm(sliced - expected)))
        lhs = np.einsum("rq,qkl->rkl", G2.adjacency.matrix, img)
        rhs = theta.apply_vec(G1.adjacency.matrix[:, p])
        adj = max(adj, float(np.linalg.norm(lhs - rhs)))
    return {"homomorphism": hom, "state_covariance": state, "adjacency_covariance": adj}
