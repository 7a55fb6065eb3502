"""Canonical quantum-graph constructors and their distinguished families.

Complete, trivial, rank-one, automorphism, and classical graphs, plus the
canonical relation family s(x) = delta^-2 (x T*) (x) u acting on the
defining representation tensored with a unitary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blocks import (
    DEFAULT_TOL,
    AlgebraElement,
    BlockStructure,
    DeltaState,
    adapted_unit,
    validate_delta_form,
)
from .errors import (
    BadNormalization,
    InvalidPermutation,
    NotUnitary,
    NotZeroOne,
    QGraphError,
    ShapeMismatch,
    StateNotInvariant,
)
from .graphs import LinearMapOnB, QuantumGraph
from .relations import CKFamily


def complete_graph(psi: DeltaState) -> QuantumGraph:
    """The complete quantum graph: A = delta^2 psi(.) 1."""
    st = psi.structure
    matrix = psi.delta_sq * np.outer(st.unit_vector, psi.psi_vec)
    return QuantumGraph.build(psi, LinearMapOnB(st, matrix))


def trivial_graph(psi: DeltaState) -> QuantumGraph:
    """The trivial quantum graph: A = id (every vertex only loops to itself)."""
    return QuantumGraph.build(psi, LinearMapOnB.identity(psi.structure))


def trivial_structure_report(psi: DeltaState) -> str:
    """Description of the Cuntz-Pimsner algebra of the trivial graph."""
    sizes = "+".join(f"M_{n}" for n in psi.structure.sizes)
    return (
        f"O_E of the trivial graph over B = {sizes} is isomorphic to B(x)C(T) "
        "(edge correspondence is B itself)"
    )


def _rank_one_lemma_check(psi: DeltaState, rng: np.random.Generator) -> float:
    """Residual of sum_k f_ik S f_kj = Tr(rho^-1 S) f_ij on random S."""
    st = psi.structure
    worst = 0.0
    for a, n in enumerate(st.sizes):
        S = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        trace = np.sum(np.diag(S) / psi.weights[a])
        blocks = [np.zeros((m, m), dtype=complex) for m in st.sizes]
        blocks[a] = S
        Sel = AlgebraElement(st, blocks)
        for i in range(n):
            for j in range(n):
                acc = AlgebraElement.zero(st)
                for k in range(n):
                    acc = acc + adapted_unit(a, i, k, psi) * Sel * adapted_unit(a, k, j, psi)
                diff = acc - trace * adapted_unit(a, i, j, psi)
                worst = max(worst, diff.norm())
    return worst


def rank_one_graph(
    psi: DeltaState, T: AlgebraElement, tol: float = DEFAULT_TOL
) -> QuantumGraph:
    """The rank-one quantum graph A(x) = T x T*.

    Requires the per-block normalization Tr(rho_a^-1 T_a* T_a) = delta^2,
    which makes A Schur-idempotent.  A kernel identity used in that proof is
    re-verified on random data as a construction self-check.
    """
    st = psi.structure
    if T.structure != st:
        raise ShapeMismatch("generator over a different block structure")
    for a, n in enumerate(st.sizes):
        tr = float(np.real(np.sum(np.diag(T.blocks[a].conj().T @ T.blocks[a]) / psi.weights[a])))
        if abs(tr - psi.delta_sq) > tol * max(1.0, psi.delta_sq):
            raise BadNormalization(
                f"block {a}: Tr(rho^-1 T*T) = {tr:.6g}, expected {psi.delta_sq:.6g}"
            )
    lemma = _rank_one_lemma_check(psi, np.random.default_rng(7))
    if lemma > 1e-8:
        raise QGraphError(f"rank-one kernel identity failed with residual {lemma:.3e}")
    matrix = st.left_mult_matrix(T.vec) @ st.right_mult_matrix(T.star().vec)
    return QuantumGraph.build(psi, LinearMapOnB(st, matrix), tol=tol)


@dataclass(frozen=True)
class AutomorphismSpec:
    """A *-automorphism of B: a block permutation composed with inner parts.

    block_permutation[a] is the block receiving block a; unitaries[b] acts
    by conjugation inside the receiving block b.
    """

    block_permutation: tuple[int, ...]
    unitaries: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "block_permutation", tuple(int(b) for b in self.block_permutation)
        )
        object.__setattr__(
            self,
            "unitaries",
            tuple(np.asarray(u, dtype=complex) for u in self.unitaries),
        )


def _permutation_cycles(perm: tuple[int, ...]) -> list[list[int]]:
    seen = set()
    cycles = []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        nxt = perm[start]
        while nxt != start:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = perm[nxt]
        cycles.append(cyc)
    return cycles


def automorphism_graph(
    psi: DeltaState, spec: AutomorphismSpec
) -> tuple[QuantumGraph, dict]:
    """Quantum graph whose adjacency is the given *-automorphism of B.

    The report decomposes the block permutation into cycles; a cycle of
    length k on blocks of size n contributes a crossed-product factor
    M_n (x) M_k (x) C(T).  Inner parts do not affect the decomposition.
    """
    st = psi.structure
    perm = spec.block_permutation
    if sorted(perm) != list(range(st.num_blocks)):
        raise InvalidPermutation(f"{perm} is not a permutation of the blocks")
    if len(spec.unitaries) != st.num_blocks:
        raise ShapeMismatch("one unitary per block required")
    for a in range(st.num_blocks):
        if st.sizes[perm[a]] != st.sizes[a]:
            raise InvalidPermutation(
                f"block {a} (size {st.sizes[a]}) maps to size {st.sizes[perm[a]]}"
            )
        u = spec.unitaries[a]
        n = st.sizes[a]
        if u.shape != (n, n):
            raise ShapeMismatch(f"unitary {a} has shape {u.shape}")
        if np.linalg.norm(u.conj().T @ u - np.eye(n)) > 1e-12 * max(1.0, n):
            raise NotUnitary(f"matrix for block {a} is not unitary")
        if not np.allclose(psi.weights[perm[a]], psi.weights[a], atol=1e-12):
            raise StateNotInvariant(
                f"weights of blocks {a} and {perm[a]} differ under the permutation"
            )

    matrix = np.zeros((st.dim, st.dim), dtype=complex)
    for a, n in enumerate(st.sizes):
        b = perm[a]
        U = spec.unitaries[b]
        for i in range(n):
            for j in range(n):
                img = np.zeros((n, n), dtype=complex)
                img[i, j] = 1.0
                img = U @ img @ U.conj().T
                lo = st.offsets[b]
                matrix[lo : lo + n * n, st.flat_index(a, i, j)] = img.ravel()
    graph = QuantumGraph.build(psi, LinearMapOnB(st, matrix))

    cycles = _permutation_cycles(perm)
    factors = [
        f"M_{st.sizes[c[0]]}(C)(x)M_{len(c)}(C)(x)C(T)" for c in cycles
    ]
    report = {
        "cycles": cycles,
        "crossed_product_factors": factors,
        "crossed_product": " + ".join(factors),
    }
    return graph, report


def classical_graph(adj: np.ndarray) -> QuantumGraph:
    """Classical directed graph on |V| vertices: C(V), uniform state, 0/1 matrix."""
    adj = np.asarray(adj)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise ShapeMismatch(f"adjacency has shape {adj.shape}")
    if not np.all(np.isin(adj, (0, 1))):
        raise NotZeroOne("adjacency entries must be 0 or 1")
    V = adj.shape[0]
    psi = validate_delta_form([1] * V, [[1.0 / V]] * V)
    return QuantumGraph.build(psi, LinearMapOnB(psi.structure, adj.astype(complex)))


def _defining_rep_matrix(x: AlgebraElement) -> np.ndarray:
    """Block-diagonal matrix of x on C^(N_1 + ... + N_d)."""
    sizes = x.structure.sizes
    n = sum(sizes)
    out = np.zeros((n, n), dtype=complex)
    pos = 0
    for size, blk in zip(sizes, x.blocks):
        out[pos : pos + size, pos : pos + size] = blk
        pos += size
    return out


def canonical_lqck_family(
    kind: str,
    psi: DeltaState,
    T: AlgebraElement | None = None,
    u: np.ndarray | None = None,
    tol: float = DEFAULT_TOL,
) -> CKFamily:
    """The family s(x) = delta^-2 (x T*) (x) u on the defining representation.

    kind "trivial" uses T = 1; kind "rank_one" requires a normalized T.  The
    local relation residuals are verified at construction.
    """
    from .relations import lqck_residuals

    st = psi.structure
    if kind == "trivial":
        if T is not None and (T - AlgebraElement.unit(st)).norm() > 1e-12:
            raise ShapeMismatch("trivial family requires T = 1")
        T = AlgebraElement.unit(st)
        graph = trivial_graph(psi)
    elif kind == "rank_one":
        if T is None:
            raise ShapeMismatch("rank-one family requires a generator T")
        graph = rank_one_graph(psi, T, tol=tol)
    else:
        raise ShapeMismatch(f"unknown family kind {kind!r}")

    if u is None:
        u = np.eye(1, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ShapeMismatch(f"unitary has shape {u.shape}")
    if np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) > 1e-12 * max(1.0, u.shape[0]):
        raise NotUnitary("auxiliary matrix is not unitary")

    Tstar = T.star()
    eye = np.eye(st.dim, dtype=complex)
    images = np.stack(
        [
            np.kron(
                _defining_rep_matrix(AlgebraElement.from_vector(st, eye[p]) * Tstar), u
            )
            / psi.delta_sq
            for p in range(st.dim)
        ]
    )
    fam = CKFamily(sum(st.sizes) * u.shape[0], images)
    report = lqck_residuals(fam, graph)
    worst = max(report["lqck1"], report["lqck2"], report["lqck3"])
    if worst > tol:
        raise QGraphError(f"canonical family has local residual {worst:.3e}")
    return fam
