"""Interior tensor powers and the truncated Fock module of an edge correspondence.

F_N = B + E + E^{(x)2} + ... + E^{(x)N} with creation operators T(xi) that
annihilate the top level and the diagonal left action pi.  All operator
identities are exact only away from the truncation boundary, so residual
reports compress to interior levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import (
    DEFAULT_TOL,
    AlgebraElement,
    adapted_unit,
)
from .correspondence import (
    Correspondence,
    from_spanning,
    build_edge_correspondence,
    trivial_correspondence,
    ModuleSpace,
)
from .errors import (
    BudgetExceeded,
    HasQuantumSource,
    MismatchedBase,
    NotCompletelyPositive,
    ShapeMismatch,
)
from .graphs import (
    QuantumGraph,
    is_completely_positive,
    quantum_sources_sinks,
)

FOCK_COORD_BUDGET = 5000


def _same_base(X: Correspondence, Y: Correspondence) -> None:
    if X.structure != Y.structure:
        raise MismatchedBase("correspondences over different block structures")
    if len(X.psi.weights) != len(Y.psi.weights) or any(
        not np.allclose(a, b) for a, b in zip(X.psi.weights, Y.psi.weights)
    ):
        raise MismatchedBase("correspondences over different states")


def interior_tensor(X: Correspondence, Y: Correspondence) -> Correspondence:
    """Interior tensor product X (x)_B Y as a correspondence over (B, psi).

    The semi-inner product <x1 (x) y1, x2 (x) y2>_B = <y1, <x1,x2>_B . y2>_B
    is evaluated on the product basis and the Gram kernel is quotiented out,
    which realizes the balanced relation x.b (x) y = x (x) b.y.
    """
    _same_base(X, Y)
    st = X.structure
    nX, nY = X.size, Y.size
    binner = np.einsum(
        "ijp,pml,kmd->ikjld", X.binner, Y.lmul, Y.binner, optimize=True
    ).reshape(nX * nY, nX * nY, st.dim)
    eyeX = np.eye(nX)
    eyeY = np.eye(nY)
    lmul = np.stack([np.kron(X.lmul[p], eyeY) for p in range(st.dim)])
    rmul = np.stack([np.kron(eyeX, Y.rmul[p]) for p in range(st.dim)])
    ambient = ModuleSpace(st, X.psi, binner, lmul, rmul)
    return from_spanning(ambient, np.eye(nX * nY, dtype=complex))


@dataclass(frozen=True)
class FockTruncation:
    """Levels E^{(x)0..N} with creation tensors and the per-level left action.

    creation[l] has shape (dim level l+1, dim E, dim level l); contracting a
    module vector xi of E into the middle slot gives the matrix of T(xi)
    from level l to level l+1.
    """

    graph: QuantumGraph
    edge: Correspondence
    levels: tuple[Correspondence, ...]
    creation: tuple[np.ndarray, ...]

    @property
    def level_dims(self) -> tuple[int, ...]:
        return tuple(lvl.size for lvl in self.levels)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def total_dim(self) -> int:
        return sum(self.level_dims)

    @property
    def offsets(self) -> tuple[int, ...]:
        offs = [0]
        for d in self.level_dims:
            offs.append(offs[-1] + d)
        return tuple(offs)

    def level_slice(self, l: int) -> slice:
        offs = self.offsets
        return slice(offs[l], offs[l + 1])

    def pi_level(self, l: int, x: AlgebraElement) -> np.ndarray:
        """Matrix of the left action of x on level l."""
        return np.einsum("p,pab->ab", x.vec, self.levels[l].lmul)

    def creation_matrix(self, l: int, xi: np.ndarray) -> np.ndarray:
        """Matrix of T(xi) from level l to level l+1."""
        return np.einsum("aeb,e->ab", self.creation[l], xi)

    def big_creation(self, xi: np.ndarray) -> np.ndarray:
        """T(xi) on the full truncation; the top level is annihilated."""
        D = self.total_dim
        out = np.zeros((D, D), dtype=complex)
        for l in range(self.depth):
            out[self.level_slice(l + 1), self.level_slice(l)] = self.creation_matrix(l, xi)
        return out

    def big_pi(self, x: AlgebraElement) -> np.ndarray:
        """Diagonal left action on the full truncation."""
        D = self.total_dim
        out = np.zeros((D, D), dtype=complex)
        for l in range(self.depth + 1):
            out[self.level_slice(l), self.level_slice(l)] = self.pi_level(l, x)
        return out

    def interior_projector(self) -> np.ndarray:
        """Orthogonal projection onto levels 1..N-1."""
        D = self.total_dim
        diag = np.zeros(D)
        for l in range(1, self.depth):
            diag[self.level_slice(l)] = 1.0
        return np.diag(diag)


def build_fock(
    G: QuantumGraph, N: int, budget: int = FOCK_COORD_BUDGET
) -> FockTruncation:
    """Construct the depth-N Fock truncation of the edge correspondence of G."""
    if N < 1:
        raise ShapeMismatch(f"level count {N} must be at least 1")
    ok, min_eig = is_completely_positive(G.psi, G.adjacency)
    if not ok:
        raise NotCompletelyPositive(f"Choi min eigenvalue {min_eig:.3e}")
    sources, _ = quantum_sources_sinks(G)
    if sources:
        raise HasQuantumSource(f"blocks {sources} lie in ker A")

    E = build_edge_correspondence(G)
    levels = [trivial_correspondence(G.psi), E]
    total = levels[0].size + levels[1].size
    if total > budget:
        raise BudgetExceeded(f"{total} Fock coordinates exceed budget {budget}")
    for _ in range(2, N + 1):
        # bound the next level by its ambient size before materializing it
        bound = E.size * levels[-1].size
        if total + bound > budget:
            raise BudgetExceeded(
                f"next level needs up to {bound} coordinates on top of {total}; "
                f"budget is {budget}"
            )
        nxt = interior_tensor(E, levels[-1])
        levels.append(nxt)
        total += nxt.size

    creation = []
    # level 0 is B itself: T(xi) x = xi . x through the right action of E
    V0 = levels[0].basis_ambient
    creation.append(np.einsum("bp,pae->aeb", V0, E.rmul))
    for l in range(1, N):
        nxt = levels[l + 1]
        proj = nxt.basis_ambient.conj() @ nxt.ambient.scalar_gram
        creation.append(proj.reshape(nxt.size, E.size, levels[l].size))
    return FockTruncation(G, E, tuple(levels), tuple(creation))


def representation_residuals(F: FockTruncation) -> dict:
    """Defects of the covariant-representation identities on the truncation.

    inner: T(xi)*T(eta) = pi(<xi,eta>_B) on levels 0..N-1.
    covariance: pi(x) = sum_k T(f_ik.eps)T(f_jk.eps)* on levels 1..N-1.
    vacuum_defect: the norm of pi on level 0, where covariance must fail.
    """
    G = F.graph
    E = F.edge
    st = G.structure

    inner = 0.0
    for l in range(F.depth):
        Cr = F.creation[l]
        TT = np.einsum("aeb,afc->efbc", Cr.conj(), Cr, optimize=True)
        RR = np.einsum("efd,dbc->efbc", E.binner, F.levels[l].lmul, optimize=True)
        diff = TT - RR
        per_pair = np.sqrt((np.abs(diff) ** 2).sum(axis=(2, 3)))
        inner = max(inner, float(per_pair.max(initial=0.0)))

    cov = 0.0
    for l in range(1, F.depth):
        for a, n in enumerate(st.sizes):
            C = [
                [F.creation_matrix(l - 1, E.left_act(adapted_unit(a, i, k, G.psi), E.generator)) for k in range(n)]
                for i in range(n)
            ]
            for i in range(n):
                for j in range(n):
                    lhs = F.pi_level(l, adapted_unit(a, i, j, G.psi))
                    rhs = sum(C[i][k] @ C[j][k].conj().T for k in range(n))
                    cov = max(cov, float(np.linalg.norm(lhs - rhs)))

    vacuum = 0.0
    eye = np.eye(st.dim, dtype=complex)
    for p in range(st.dim):
        vacuum = max(
            vacuum,
            float(np.linalg.norm(F.pi_level(0, AlgebraElement.from_vector(st, eye[p])))),
        )
    return {"inner": inner, "covariance": cov, "vacuum_defect": vacuum}


def canonical_fock_family(F: FockTruncation):
    """The family S(x) = (1/delta) T(x . eps) as truncation matrices per unit.

    Returns a CKFamily whose images act on the full truncation; relation
    residuals for it are meaningful only compressed to interior levels.
    """
    from .relations import CKFamily

    G = F.graph
    E = F.edge
    st = G.structure
    delta = np.sqrt(G.delta_sq)
    eye = np.eye(st.dim, dtype=complex)
    images = np.stack(
        [
            F.big_creation(E.left_act(AlgebraElement.from_vector(st, eye[p]), E.generator)) / delta
            for p in range(st.dim)
        ]
    )
    return CKFamily(F.total_dim, images)


def lqck_fock_residuals(G: QuantumGraph, N: int, budget: int = FOCK_COORD_BUDGET) -> dict:
    """Interior residuals of LQCK1-3 and the abstract-Toeplitz identities.

    The family is S(x) = (1/delta) T(x.eps) on the depth-N truncation; all
    norms are compressed to levels 1..N-1 where the truncated operators
    agree with the untruncated Toeplitz representation.
    """
    from .relations import lqck_residuals

    F = build_fock(G, N, budget)
    fam = canonical_fock_family(F)
    P = F.interior_projector()
    report = lqck_residuals(fam, G, compression=P)

    st = G.structure
    E = F.edge
    eye = np.eye(st.dim, dtype=complex)
    bigT = [
        F.big_creation(E.left_act(AlgebraElement.from_vector(st, eye[p]), E.generator))
        for p in range(st.dim)
    ]
    mt = st.mul_tensor
    star = st.star_perm
    # T*(x) := T(x*)* on basis units
    bigTstar = [bigT[star[p]].conj().T for p in range(st.dim)]

    # mu(T* (x) T) = delta^-2 pi A m on basis pairs
    toeplitz1 = 0.0
    for p in range(st.dim):
        for q in range(st.dim):
            prod_vec = mt[:, p, q].astype(complex)
            lhs = bigTstar[p] @ bigT[q]
            Axy = G.adjacency(AlgebraElement.from_vector(st, prod_vec))
            rhs = F.big_pi(Axy) / G.delta_sq
            toeplitz1 = max(toeplitz1, float(np.linalg.norm(P @ (lhs - rhs) @ P)))

    # mu(T (x) T*) m* = psi_t, i.e. equals pi on levels >= 1
    from .blocks import comultiply

    toeplitz2 = 0.0
    for u in range(st.dim):
        x = AlgebraElement.from_vector(st, eye[u])
        W = comultiply(x, G.psi).coeff
        lhs = np.zeros((F.total_dim, F.total_dim), dtype=complex)
        for p in range(st.dim):
            for q in range(st.dim):
                c = W[p, q]
                if c != 0:
                    lhs += c * (bigT[p] @ bigTstar[q])
        rhs = F.big_pi(x)
        toeplitz2 = max(toeplitz2, float(np.linalg.norm(P @ (lhs - rhs) @ P)))

    report["toeplitz1"] = toeplitz1
    report["toeplitz2"] = toeplitz2
    report["level_dims"] = F.level_dims
    return report
