"""Quantum dynamical maps in Heisenberg-picture Kraus form.

A channel is Gamma(A) = sum_a W_a† A W_a with sum_a W_a† W_a = 1 (unital).
Its Schrodinger-picture dual acts on states as rho -> sum_a W_a rho W_a†
and is trace preserving.  Maps that are not completely positive can only be
handled as raw superoperator matrices, never as :class:`KrausMap`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    DEFAULT_TOL,
    dag,
    eye,
    matrix_unit,
    sandwich_superop,
    unvec,
    vec,
)

# Choi eigenvalues below KRAUS_CUT * (largest eigenvalue) are dropped when
# canonicalizing a Kraus decomposition.
KRAUS_CUT = 1e-11


class KrausMap:
    """Completely positive unital map in Heisenberg-picture Kraus form."""

    def __init__(self, kraus_ops, *, tol: float = DEFAULT_TOL):
        ops = tuple(np.asarray(w, dtype=complex) for w in kraus_ops)
        if not ops:
            raise ValueError("a Kraus map needs at least one operator")
        n = ops[0].shape[0]
        for w in ops:
            if w.shape != (n, n):
                raise ValueError("all Kraus operators must be square with equal dims")
        gram = sum(dag(w) @ w for w in ops)
        defect = float(np.max(np.abs(gram - eye(n))))
        if defect > tol:
            raise ValueError(
                f"Kraus set is not unital: sum W†W deviates from identity by {defect:.3e}"
            )
        self.kraus_ops = ops
        self.dim = n
        self.unitality_defect = defect

    def __call__(self, a: np.ndarray) -> np.ndarray:
        """Heisenberg action Gamma(A) = sum W† A W."""
        a = np.asarray(a, dtype=complex)
        if a.shape != (self.dim, self.dim):
            raise ValueError("operator dimension does not match the channel")
        out = np.zeros_like(a)
        for w in self.kraus_ops:
            out += dag(w) @ a @ w
        return out

    def apply_dual(self, rho: np.ndarray) -> np.ndarray:
        """Schrodinger action Gamma*(rho) = sum W rho W†."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.dim, self.dim):
            raise ValueError("state dimension does not match the channel")
        out = np.zeros_like(rho)
        for w in self.kraus_ops:
            out += w @ rho @ dag(w)
        return out

    def heisenberg_matrix(self) -> np.ndarray:
        return sum(sandwich_superop(dag(w), w) for w in self.kraus_ops)

    def schrodinger_matrix(self) -> np.ndarray:
        return sum(sandwich_superop(w, dag(w)) for w in self.kraus_ops)

    def __repr__(self):
        return f"KrausMap(dim={self.dim}, rank={len(self.kraus_ops)})"


def identity_channel(n: int) -> KrausMap:
    return KrausMap([eye(n)])


def unitary_channel(u: np.ndarray) -> KrausMap:
    return KrausMap([u])


def dephasing_channel(p: float) -> KrausMap:
    """Qubit dephasing: Gamma(sx) = (1-2p) sx, diagonal operators untouched."""
    from .operators import sz

    if not 0.0 <= p <= 1.0:
        raise ValueError("dephasing strength must lie in [0, 1]")
    return KrausMap([np.sqrt(1.0 - p) * eye(2), np.sqrt(p) * sz])


def depolarizing_channel() -> KrausMap:
    """Completely depolarizing qubit channel, Gamma(A) = Tr(A)/2 * 1."""
    from .operators import sx, sy, sz

    return KrausMap([0.5 * eye(2), 0.5 * sx, 0.5 * sy, 0.5 * sz])


def random_unital_channel(n: int, kraus_rank: int, rng: np.random.Generator) -> KrausMap:
    """Random unital CP map from a Haar-random Stinespring isometry.

    The n*kraus_rank x n isometry is chopped into kraus_rank blocks of n rows;
    these satisfy sum W†W = 1 exactly.
    """
    g = rng.normal(size=(n * kraus_rank, n)) + 1j * rng.normal(size=(n * kraus_rank, n))
    q, _ = np.linalg.qr(g)
    return KrausMap([q[a * n:(a + 1) * n, :] for a in range(kraus_rank)])


# ---------------------------------------------------------------------------
# Choi matrix and complete positivity


def choi_matrix(channel) -> np.ndarray:
    """Choi matrix sum_ij E_ij (x) Phi*(E_ij) of the Schrodinger-picture map.

    Accepts a KrausMap or a raw Schrodinger-picture superoperator matrix.
    """
    if isinstance(channel, KrausMap):
        n = channel.dim
        apply = channel.apply_dual
    else:
        s = np.asarray(channel, dtype=complex)
        n = int(round(np.sqrt(s.shape[0])))
        apply = lambda x: unvec(s @ vec(x), n)  # noqa: E731
    c = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            c += np.kron(matrix_unit(n, i, j), apply(matrix_unit(n, i, j)))
    return c


@dataclass(frozen=True)
class CPCheck:
    is_cp: bool
    min_eigenvalue: float


def cp_check(channel, tol: float = DEFAULT_TOL) -> CPCheck:
    """Complete positivity test: the Choi matrix must be PSD within tol."""
    c = choi_matrix(channel)
    evals = np.linalg.eigvalsh(0.5 * (c + dag(c)))
    lo = float(evals.min())
    return CPCheck(is_cp=lo >= -tol, min_eigenvalue=lo)


def kraus_from_choi(choi: np.ndarray, *, cut: float = KRAUS_CUT) -> list[np.ndarray]:
    """Kraus operators of a CP map from its (PSD) Choi matrix."""
    choi = 0.5 * (choi + dag(choi))
    n = int(round(np.sqrt(choi.shape[0])))
    evals, evecs = np.linalg.eigh(choi)
    top = evals.max() if evals.size else 0.0
    if top <= 0.0:
        raise ValueError("Choi matrix has no positive part; map is not CP")
    if evals.min() < -1e-7 * top:
        raise ValueError(f"Choi matrix is not PSD (min eigenvalue {evals.min():.3e})")
    ops = []
    for lam, v in zip(evals, evecs.T):
        if lam > cut * top:
            # choi eigenvector v = sum_i |i> (x) W|i>, so W[r, i] = v[i*n + r]
            ops.append(np.sqrt(lam) * v.reshape(n, n).T)
    return ops


def reduce_kraus(channel: KrausMap, *, tol: float = DEFAULT_TOL) -> KrausMap:
    """Canonical Kraus list (at most dim**2 operators) via the Choi spectrum."""
    return KrausMap(kraus_from_choi(choi_matrix(channel)), tol=max(tol, 1e-8))


def channel_from_superop(heisenberg: np.ndarray, *, tol: float = DEFAULT_TOL) -> KrausMap:
    """Build a KrausMap from a Heisenberg superoperator matrix.

    Raises ValueError when the map is not CP or not unital within tol; such
    maps must stay raw superoperators.
    """
    heisenberg = np.asarray(heisenberg, dtype=complex)
    n = int(round(np.sqrt(heisenberg.shape[0])))
    unit_defect = float(np.max(np.abs(unvec(heisenberg @ vec(eye(n)), n) - eye(n))))
    if unit_defect > tol:
        raise ValueError(f"superoperator is not unital (defect {unit_defect:.3e})")
    schrodinger = dag(heisenberg)
    ops = kraus_from_choi(choi_matrix(schrodinger))
    return KrausMap(ops, tol=max(tol, 1e-7))


# ---------------------------------------------------------------------------
# Irreversibility diagnostics


def kadison_defect(channel: KrausMap, a: np.ndarray) -> np.ndarray:
    """Gamma(A†A) - Gamma(A†)Gamma(A); PSD for every CP unital map."""
    a = np.asarray(a, dtype=complex)
    return channel(dag(a) @ a) - channel(dag(a)) @ channel(a)


def dissipation_function(channel: KrausMap, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Sesquilinear dissipation form Gamma(A†B) - Gamma(A†)Gamma(B)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        raise ValueError("operator dimensions do not match")
    return channel(dag(a) @ b) - channel(dag(a)) @ channel(b)


# ---------------------------------------------------------------------------
# Composition


def compose(g1: KrausMap, g2: KrausMap, *, reduce: bool = True) -> KrausMap:
    """Heisenberg composition (g1 o g2)(A) = g1(g2(A)).

    The Kraus list of the composition is {W2_a W1_b}; for unitary channels
    compose(U-channel, V-channel) is the channel of the product V U.
    """
    if g1.dim != g2.dim:
        raise ValueError("channel dimensions do not match")
    ops = [w2 @ w1 for w2 in g2.kraus_ops for w1 in g1.kraus_ops]
    out = KrausMap(ops, tol=1e-7)
    if reduce and len(ops) > g1.dim ** 2:
        out = reduce_kraus(out)
    return out


def power(channel: KrausMap, k: int) -> KrausMap:
    """k-fold Heisenberg composition, with rank reduction at every step."""
    if k < 0:
        raise ValueError("power requires k >= 0")
    result = identity_channel(channel.dim)
    for _ in range(k):
        result = compose(channel, result)
    return result
