"""GKLS semigroup generators and detailed-balance structure.

The Heisenberg generator is

    L(A) = i[H, A] + sum_j V_j† A V_j - 1/2 {sum_j V_j† V_j, A}

so that L(1) = 0 and the dual semigroup on states is trace preserving.
The dissipative part L_D is the V-sum alone; the split into L_H and L_D is
taken from the input structure and never re-derived.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .operators import (
    DEFAULT_TOL,
    LiouvilleMetric,
    dag,
    eye,
    hermitian_part,
    is_hermitian,
    left_mult_superop,
    right_mult_superop,
    sandwich_superop,
    unvec,
    vec,
)


class GKLSGenerator:
    """Semigroup generator given by a hermitian H and a list of Lindblad operators."""

    def __init__(self, hamiltonian, lindblad_ops=(), *, tol: float = DEFAULT_TOL):
        h = np.asarray(hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("hamiltonian must be a square matrix")
        if not is_hermitian(h, tol):
            raise ValueError("hamiltonian is not hermitian within tolerance")
        ops = tuple(np.asarray(v, dtype=complex) for v in lindblad_ops)
        for v in ops:
            if v.shape != h.shape:
                raise ValueError("Lindblad operator dimension does not match H")
        self.hamiltonian = h
        self.lindblad_ops = ops
        self.dim = h.shape[0]

    def __call__(self, a: np.ndarray) -> np.ndarray:
        return self.hamiltonian_part(a) + self.dissipative_part(a)

    def hamiltonian_part(self, a: np.ndarray) -> np.ndarray:
        h = self.hamiltonian
        return 1j * (h @ a - a @ h)

    def dissipative_part(self, a: np.ndarray) -> np.ndarray:
        a = np.asarray(a, dtype=complex)
        if a.shape != (self.dim, self.dim):
            raise ValueError("operator dimension does not match the generator")
        out = np.zeros_like(a)
        for v in self.lindblad_ops:
            vv = dag(v) @ v
            out += dag(v) @ a @ v - 0.5 * (vv @ a + a @ vv)
        return out

    def hamiltonian_matrix(self) -> np.ndarray:
        h = self.hamiltonian
        return 1j * (left_mult_superop(h) - right_mult_superop(h))

    def dissipator_matrix(self) -> np.ndarray:
        n = self.dim
        out = np.zeros((n * n, n * n), dtype=complex)
        for v in self.lindblad_ops:
            vv = dag(v) @ v
            out += sandwich_superop(dag(v), v)
            out -= 0.5 * (left_mult_superop(vv) + right_mult_superop(vv))
        return out

    def heisenberg_matrix(self) -> np.ndarray:
        return self.hamiltonian_matrix() + self.dissipator_matrix()

    def schrodinger_matrix(self) -> np.ndarray:
        return dag(self.heisenberg_matrix())

    def __repr__(self):
        return f"GKLSGenerator(dim={self.dim}, n_lindblad={len(self.lindblad_ops)})"


def semigroup(gen: GKLSGenerator, t: float) -> np.ndarray:
    """Heisenberg superoperator matrix of T_t = exp(t L); requires t >= 0."""
    if t < 0:
        raise ValueError("semigroup parameter must be non-negative")
    return expm(t * gen.heisenberg_matrix())


def evolve_state(gen: GKLSGenerator, rho: np.ndarray, t: float) -> np.ndarray:
    """Schrodinger evolution exp(t L*) applied to a state."""
    if t < 0:
        raise ValueError("semigroup parameter must be non-negative")
    s = expm(t * gen.schrodinger_matrix())
    return unvec(s @ vec(np.asarray(rho, dtype=complex)), gen.dim)


def dissipativity_defect(gen: GKLSGenerator, a: np.ndarray) -> np.ndarray:
    """L(A†A) - L(A†)A - A†L(A); PSD, and equal to sum_j [V_j,A]†[V_j,A]."""
    a = np.asarray(a, dtype=complex)
    return gen(dag(a) @ a) - gen(dag(a)) @ a - dag(a) @ gen(a)


def canonical_form(gen: GKLSGenerator, *, cut: float = 1e-12) -> GKLSGenerator:
    """Equivalent generator with at most dim**2 - 1 traceless Lindblad operators.

    Traces of the V_j are absorbed into the Hamiltonian, the remaining
    traceless parts are re-mixed through the eigendecomposition of their
    (PSD) coefficient matrix over a traceless operator basis, and zero modes
    are dropped.  The superoperator is unchanged to rounding.
    """
    n = gen.dim
    if not gen.lindblad_ops:
        return gen
    # traceless orthonormal basis from the matrix units minus the trace part
    basis = []
    for i in range(n):
        for j in range(n):
            m = np.zeros((n, n), dtype=complex)
            m[i, j] = 1.0
            if i == j:
                m -= eye(n) / n
            basis.append(m)
    from .operators import vec as _vec

    rows = np.stack([_vec(b) for b in basis])
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    basis = [np.asarray(vh[k]).reshape((n, n), order="F") for k in range(int(np.sum(s > 1e-12)))]

    h_extra = np.zeros((n, n), dtype=complex)
    coeffs = []
    for v in gen.lindblad_ops:
        c = np.trace(v) / np.sqrt(n)
        w = v - c * eye(n) / np.sqrt(n)
        # the scalar/traceless cross terms act as a Hamiltonian shift
        h_extra += 1j * (np.conj(c) * w - c * dag(w)) / (2.0 * np.sqrt(n))
        coeffs.append(np.array([np.sum(b.conj() * w) for b in basis]))
    kossakowski = sum(np.outer(c, c.conj()) for c in coeffs)
    evals, evecs = np.linalg.eigh(0.5 * (kossakowski + dag(kossakowski)))
    ops = []
    for lam, col in zip(evals, evecs.T):
        if lam > cut * max(evals.max(), 1.0):
            ops.append(np.sqrt(lam) * sum(ck * b for ck, b in zip(col, basis)))
    return GKLSGenerator(gen.hamiltonian + hermitian_part(h_extra), ops)


# ---------------------------------------------------------------------------
# Detailed balance


@dataclass(frozen=True)
class DetailedBalanceReport:
    stationary: bool
    commuting_parts: bool
    hermitian_dissipator: bool
    residuals: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.stationary and self.commuting_parts and self.hermitian_dissipator


def detailed_balance_check(
    gen: GKLSGenerator, metric: LiouvilleMetric, tol: float = 1e-8
) -> DetailedBalanceReport:
    """Verify the three detailed-balance conditions for sigma = metric.sigma.

    1. sigma is stationary for the dual generator and [H, sigma] = 0,
    2. the Hamiltonian and dissipative parts commute as superoperators,
    3. L_D is hermitian with respect to <A, B>_sigma, checked as the matrix
       identity G S_D = S_D† G on the full operator basis, G = kron(sigma.T, 1).
    """
    if metric.dim != gen.dim:
        raise ValueError("metric dimension does not match the generator")
    sigma = metric.sigma
    n = gen.dim

    stat_res = float(np.max(np.abs(unvec(gen.schrodinger_matrix() @ vec(sigma), n))))
    ham_res = float(np.max(np.abs(gen.hamiltonian @ sigma - sigma @ gen.hamiltonian)))

    s_h = gen.hamiltonian_matrix()
    s_d = gen.dissipator_matrix()
    scale = max(np.linalg.norm(s_h, 2) * np.linalg.norm(s_d, 2), 1.0)
    comm_res = float(np.linalg.norm(s_h @ s_d - s_d @ s_h, 2)) / scale

    g = metric.gram_superop()
    herm_scale = max(np.linalg.norm(s_d, 2), 1.0)
    herm_res = float(np.max(np.abs(g @ s_d - dag(s_d) @ g))) / herm_scale

    return DetailedBalanceReport(
        stationary=(stat_res <= tol and ham_res <= tol),
        commuting_parts=(comm_res <= tol),
        hermitian_dissipator=(herm_res <= tol),
        residuals={
            "stationarity": stat_res,
            "hamiltonian_commutes_with_sigma": ham_res,
            "parts_commute": comm_res,
            "dissipator_hermiticity": herm_res,
        },
    )


# ---------------------------------------------------------------------------
# Thermal (Gibbs) generator


def gibbs_state(hamiltonian: np.ndarray, temperature: float) -> np.ndarray:
    """Normalized exp(-H/T)."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    rho = expm(-np.asarray(hamiltonian, dtype=complex) / temperature)
    return rho / np.trace(rho)


def bohr_frequency(hamiltonian: np.ndarray, v: np.ndarray, *, tol: float = 1e-8) -> float:
    """Frequency omega >= 0 of an energy-lowering eigenoperator, [H, V] = -omega V.

    Extracted basis-free as omega = -Tr(V†[H,V]) / Tr(V†V); a residual in
    [H,V] + omega V beyond tol, or omega < 0, is an error.
    """
    h = np.asarray(hamiltonian, dtype=complex)
    v = np.asarray(v, dtype=complex)
    comm = h @ v - v @ h
    norm2 = float(np.real(np.sum(v.conj() * v)))
    if norm2 <= 0:
        raise ValueError("eigenoperator must be nonzero")
    omega = -complex(np.sum(v.conj() * comm)) / norm2
    if abs(omega.imag) > tol:
        raise ValueError(f"eigenoperator frequency is not real ({omega:.3e})")
    omega = omega.real
    scale = float(np.max(np.abs(v)))
    residual = float(np.max(np.abs(comm + omega * v))) / max(scale, 1e-300)
    if residual > tol:
        raise ValueError(
            f"[H, V] = -omega V violated beyond tolerance (residual {residual:.3e})"
        )
    if omega < -tol:
        raise ValueError(
            f"eigenoperator raises the energy (omega = {omega:.6g} < 0); pass V† instead"
        )
    return max(omega, 0.0)


@dataclass(frozen=True)
class GibbsGenerator:
    """Detailed-balance generator with stationary Gibbs state exp(-H/T)/Z.

    Each eigenoperator V_j lowers the energy by omega_j >= 0 and contributes
    the Lindblad pair {V_j, exp(-omega_j / 2T) V_j†}, so downward transitions
    run at full rate and upward ones are thermally suppressed.
    """

    hamiltonian: np.ndarray
    temperature: float
    eigen_ops: tuple  # pairs (V_j, omega_j)
    generator: GKLSGenerator
    stationary_state: np.ndarray

    def metric(self) -> LiouvilleMetric:
        return LiouvilleMetric(self.stationary_state)


def build_gibbs_generator(
    hamiltonian: np.ndarray,
    temperature: float,
    eigen_ops,
    *,
    tol: float = 1e-8,
) -> GibbsGenerator:
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    h = np.asarray(hamiltonian, dtype=complex)
    pairs = []
    lindblad = []
    for v in eigen_ops:
        v = np.asarray(v, dtype=complex)
        omega = bohr_frequency(h, v, tol=tol)
        pairs.append((v, omega))
        lindblad.append(v)
        lindblad.append(np.exp(-omega / (2.0 * temperature)) * dag(v))
    gen = GKLSGenerator(h, lindblad)
    sigma = gibbs_state(h, temperature)
    stat_res = float(np.max(np.abs(unvec(gen.schrodinger_matrix() @ vec(sigma), gen.dim))))
    if stat_res > max(tol, 1e-7):
        raise ValueError(f"Gibbs state is not stationary (residual {stat_res:.3e})")
    return GibbsGenerator(
        hamiltonian=h,
        temperature=float(temperature),
        eigen_ops=tuple(pairs),
        generator=gen,
        stationary_state=sigma,
    )
