"""Quantum Cuntz-Krieger relation systems: global (QCK), local (LQCK/QCP),
and the classical-graph reduction.

A family is a linear map s: B -> M_k given by its images on the standard
matrix units.  Residuals are raw Frobenius norms; the optional compression
argument evaluates ||P X P|| instead, which is how families extracted from
a Fock truncation are judged on interior levels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import AlgebraElement, BlockStructure, DeltaState, comultiply
from .errors import NotClassical, ShapeMismatch
from .graphs import QuantumGraph


@dataclass(frozen=True)
class CKFamily:
    """Linear map s: B -> M_k via per-standard-unit images.

    images[p] is the k x k matrix s(b_p); the conjugate family
    s*(x) = s(x*)* is derived, never stored.
    """

    k: int
    images: np.ndarray  # (dim B, k, k)

    def __post_init__(self):
        images = np.asarray(self.images, dtype=complex)
        if images.ndim != 3 or images.shape[1:] != (self.k, self.k):
            raise ShapeMismatch(f"family images have shape {images.shape}")
        object.__setattr__(self, "images", images)

    @classmethod
    def zero(cls, structure: BlockStructure, k: int = 1) -> "CKFamily":
        return cls(k, np.zeros((structure.dim, k, k)))

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return np.einsum("p,pkl->kl", np.asarray(vec, dtype=complex), self.images)

    def star_images(self, structure: BlockStructure) -> np.ndarray:
        """Images of the conjugate family s*(b_p) = s(b_p*)*."""
        return np.conj(np.swapaxes(self.images[structure.star_perm], -1, -2))


def _check_family(s: CKFamily, G: QuantumGraph) -> None:
    if s.images.shape[0] != G.structure.dim:
        raise ShapeMismatch(
            f"family has {s.images.shape[0]} unit images, graph needs {G.structure.dim}"
        )


def _comult_tensor(G: QuantumGraph) -> np.ndarray:
    """W[u, p, q]: coefficient of b_p (x) b_q in m*(b_u)."""
    st = G.structure
    eye = np.eye(st.dim, dtype=complex)
    return np.stack(
        [comultiply(AlgebraElement.from_vector(st, eye[u]), G.psi).coeff for u in range(st.dim)]
    )


def _nrm(X: np.ndarray, P: np.ndarray | None) -> float:
    if P is None:
        return float(np.linalg.norm(X))
    return float(np.linalg.norm(P @ X @ P))


def qck_residuals(
    s: CKFamily, G: QuantumGraph, compression: np.ndarray | None = None
) -> dict[str, float]:
    """Residuals of the global relations QCK1-3, maximized over standard units.

    QCK1: mu(mu x 1)(s x s* x s)(m* x 1)m* = s
    QCK2: mu(s* x s)m* = mu(s x s*)m*A
    QCK3: mu(s x s*)m*(1) = delta^-2 1
    """
    _check_family(s, G)
    st = G.structure
    W = _comult_tensor(G)
    S = s.images
    Ss = s.star_images(st)
    A = G.adjacency.matrix
    P = compression

    double = np.einsum("upq,prt->urtq", W, W, optimize=True)
    q1 = np.einsum("urtq,rab,tbc,qcd->uad", double, S, Ss, S, optimize=True)
    r1 = max(_nrm(q1[u] - S[u], P) for u in range(st.dim))

    lhs2 = np.einsum("upq,pab,qbc->uac", W, Ss, S, optimize=True)
    psi_t = np.einsum("vpq,pab,qbc->vac", W, S, Ss, optimize=True)
    rhs2 = np.einsum("vu,vac->uac", A, psi_t, optimize=True)
    r2 = max(_nrm(lhs2[u] - rhs2[u], P) for u in range(st.dim))

    q3 = np.einsum("u,uac->ac", st.unit_vector, psi_t)
    r3 = _nrm(q3 - np.eye(s.k) / G.delta_sq, P)
    return {"qck1": r1, "qck2": r2, "qck3": r3}


def _qcp_residuals(
    s: CKFamily, G: QuantumGraph, P: np.ndarray | None
) -> dict[str, float]:
    """The explicit adapted-unit relations QCP1-3, by direct index sweeps."""
    st = G.structure
    psi = G.psi
    scale = np.sqrt(psi.weight_of_row * psi.gram_diag)
    F = s.images / scale[:, None, None]  # images on adapted units

    def f(a, i, j):
        return F[st.flat_index(a, i, j)]

    d2 = G.delta_sq
    Aad = G.adjacency.adapted_coefficients(psi)

    # sum_n s_ln (s_mn)* per (c, l, m), reused by QCP2 and QCP3
    SS = {}
    for c, nc in enumerate(st.sizes):
        for l in range(nc):
            for m in range(nc):
                SS[c, l, m] = sum(f(c, l, n) @ f(c, m, n).conj().T for n in range(nc))

    r1 = 0.0
    r2 = 0.0
    for a, na in enumerate(st.sizes):
        wa = psi.weights[a]
        for b, nb in enumerate(st.sizes):
            for i in range(na):
                for j in range(na):
                    for r in range(nb):
                        for t in range(nb):
                            lhs1 = sum(
                                f(a, i, k) @ f(a, j, k).conj().T for k in range(na)
                            ) @ f(b, r, t)
                            rhs1 = np.zeros((s.k, s.k), dtype=complex)
                            if a == b and j == r:
                                rhs1 = f(a, i, t) / (d2 * wa[j])
                            r1 = max(r1, _nrm(lhs1 - rhs1, P))

                            lhs2 = f(a, i, j).conj().T @ f(b, r, t)
                            rhs2 = np.zeros((s.k, s.k), dtype=complex)
                            if a == b and i == r:
                                col = Aad[:, st.flat_index(a, j, t)]
                                acc = np.zeros((s.k, s.k), dtype=complex)
                                for c, nc in enumerate(st.sizes):
                                    for l in range(nc):
                                        for m in range(nc):
                                            coeff = col[st.flat_index(c, l, m)]
                                            if coeff != 0:
                                                acc += coeff * SS[c, l, m]
                                rhs2 = acc / (d2 * wa[i])
                            r2 = max(r2, _nrm(lhs2 - rhs2, P))

    acc3 = np.zeros((s.k, s.k), dtype=complex)
    for c, nc in enumerate(st.sizes):
        for l in range(nc):
            for m in range(nc):
                acc3 += psi.weights[c][l] * f(c, l, m) @ f(c, l, m).conj().T
    r3 = _nrm(acc3 - np.eye(s.k) / d2, P)
    return {"qcp1": r1, "qcp2": r2, "qcp3": r3}


def lqck_residuals(
    s: CKFamily, G: QuantumGraph, compression: np.ndarray | None = None
) -> dict[str, float]:
    """Residuals of the local relations, maximized over adapted-unit pairs.

    LQCK1: mu(mu x 1)(s x s* x s)(m* x 1) = delta^-2 s m
    LQCK2: mu(s* x s) = delta^-2 mu(s x s*)m*Am
    LQCK3: mu(s x s*)m*(1) = delta^-2 1

    The same relations are re-evaluated through the explicit adapted-unit
    presentation (QCP1-3) and the two readings are reported together with
    their maximum disagreement.
    """
    _check_family(s, G)
    st = G.structure
    W = _comult_tensor(G)
    S = s.images
    Ss = s.star_images(st)
    mt = st.mul_tensor
    A = G.adjacency.matrix
    P = compression
    d2 = G.delta_sq
    scale = np.sqrt(G.psi.weight_of_row * G.psi.gram_diag)
    pair_scale = np.outer(scale, scale)

    lhs1 = np.einsum("urt,rab,tbc,vcd->uvad", W, S, Ss, S, optimize=True)
    rhs1 = np.einsum("wuv,wab->uvab", mt, S, optimize=True) / d2
    r1 = max(
        _nrm(lhs1[u, v] - rhs1[u, v], P) / pair_scale[u, v]
        for u in range(st.dim)
        for v in range(st.dim)
    )

    lhs2 = np.einsum("uab,vbc->uvac", Ss, S, optimize=True)
    psi_t = np.einsum("xpq,pab,qbc->xac", W, S, Ss, optimize=True)
    rhs2 = np.einsum("wuv,xw,xac->uvac", mt, A, psi_t, optimize=True) / d2
    r2 = max(
        _nrm(lhs2[u, v] - rhs2[u, v], P) / pair_scale[u, v]
        for u in range(st.dim)
        for v in range(st.dim)
    )

    q3 = np.einsum("u,uac->ac", st.unit_vector, psi_t)
    r3 = _nrm(q3 - np.eye(s.k) / d2, P)

    qcp = _qcp_residuals(s, G, P)
    agreement = max(
        abs(r1 - qcp["qcp1"]), abs(r2 - qcp["qcp2"]), abs(r3 - qcp["qcp3"])
    )
    return {
        "lqck1": r1,
        "lqck2": r2,
        "lqck3": r3,
        "qcp1": qcp["qcp1"],
        "qcp2": qcp["qcp2"],
        "qcp3": qcp["qcp3"],
        "agreement": agreement,
    }


def _require_classical(G: QuantumGraph) -> int:
    st = G.structure
    if any(n != 1 for n in st.sizes):
        raise NotClassical("graph has a matrix block of size > 1")
    N = st.num_blocks
    if any(abs(float(w[0]) - 1.0 / N) > 1e-12 for w in G.psi.weights):
        raise NotClassical("state is not uniform on the vertices")
    return N


def classical_reduction(
    G: QuantumGraph, s: CKFamily, compression: np.ndarray | None = None
) -> dict:
    """Cuntz-Krieger residuals of S_i = N s(e_i) for a classical graph.

    Reports the partial-isometry, Cuntz-Krieger and unit-sum residuals of
    the rescaled family, together with the QCK residuals of s itself: the
    two systems vanish together under the scaling dictionary.  The CK
    relation pairs S_i*S_i with the i-th column of the adjacency map's
    coordinate matrix (the edges into vertex i under A's action).
    """
    _check_family(s, G)
    N = _require_classical(G)
    P = compression
    A = G.adjacency.matrix.real
    S = [N * s.images[i] for i in range(N)]

    r_pi = max(_nrm(S[i] @ S[i].conj().T @ S[i] - S[i], P) for i in range(N))
    r_ck = max(
        _nrm(
            S[i].conj().T @ S[i]
            - sum(A[j, i] * S[j] @ S[j].conj().T for j in range(N)),
            P,
        )
        for i in range(N)
    )
    r_unit = _nrm(sum(Si @ Si.conj().T for Si in S) - np.eye(s.k), P)

    qck = qck_residuals(s, G, compression=P)
    return {
        "partial_isometry": r_pi,
        "cuntz_krieger": r_ck,
        "unit_sum": r_unit,
        **qck,
    }
