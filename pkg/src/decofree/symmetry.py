"""Permutation representations, collective operators and invariance checks.

N identical d-level systems live on the lexicographic tensor-product basis of
(C^d)^(x N).  Permutations act by shuffling tensor factors; collective
operators are sums of one identical single-site operator over all sites.
Groups are handled through finite generator lists (adjacent transpositions
for S_N, the three collective spin components for the su(2) action):
invariance under the generators implies invariance under everything they
generate.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .algebra import MatrixAlgebra, commutant, generated_algebra
from .channels import KrausMap
from .lindblad import GKLSGenerator
from .operators import conjugation_superop, dag, eye, sm, sx, sy, sz

SIZE_CAP = 64  # largest product dimension d**N handled by default


def _check_size(d: int, n_sites: int, cap: int) -> int:
    total = d ** n_sites
    if total > cap:
        raise ValueError(f"product dimension {total} exceeds the size cap {cap}")
    return total


def permutation_matrix(perm, d: int) -> np.ndarray:
    """Unitary shuffling tensor factors: site i of the output is site perm[i]."""
    perm = tuple(perm)
    n_sites = len(perm)
    total = d ** n_sites
    r = np.zeros((total, total), dtype=complex)
    for idx in range(total):
        digits = []
        rest = idx
        for _ in range(n_sites):
            digits.append(rest % d)
            rest //= d
        digits.reverse()  # digits[i] = basis label of site i
        new_digits = [digits[perm[i]] for i in range(n_sites)]
        new_idx = 0
        for dig in new_digits:
            new_idx = new_idx * d + dig
        r[new_idx, idx] = 1.0
    return r


@dataclass(frozen=True)
class PermutationRep:
    """S_N on (C^d)^(x N), generated by adjacent transpositions."""

    n_sites: int
    site_dim: int
    generators: tuple  # R((i, i+1)) for i = 0 .. N-2

    @property
    def dim(self) -> int:
        return self.site_dim ** self.n_sites

    def group_algebra(self) -> MatrixAlgebra:
        return generated_algebra(list(self.generators), self.dim)

    def elements(self):
        """All R(pi); only sensible for small N."""
        if self.n_sites > 6:
            raise ValueError("full group enumeration capped at N = 6")
        for perm in permutations(range(self.n_sites)):
            yield permutation_matrix(perm, self.site_dim)


def build_permutation_rep(n_sites: int, site_dim: int = 2, *, cap: int = SIZE_CAP) -> PermutationRep:
    if n_sites < 1 or site_dim < 2:
        raise ValueError("need n_sites >= 1 and site_dim >= 2")
    _check_size(site_dim, n_sites, cap)
    gens = []
    for i in range(n_sites - 1):
        perm = list(range(n_sites))
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
        gens.append(permutation_matrix(perm, site_dim))
    if not gens:  # N = 1: trivial group
        gens.append(eye(site_dim))
    return PermutationRep(n_sites=n_sites, site_dim=site_dim, generators=tuple(gens))


def embed_at_site(op: np.ndarray, site: int, n_sites: int) -> np.ndarray:
    """op on one site, identity elsewhere."""
    op = np.asarray(op, dtype=complex)
    d = op.shape[0]
    factors = [eye(d)] * n_sites
    factors[site] = op
    out = factors[0]
    for f in factors[1:]:
        out = np.kron(out, f)
    return out


def collective_op(op: np.ndarray, n_sites: int) -> np.ndarray:
    """sum_m op^(m) over all sites."""
    op = np.asarray(op, dtype=complex)
    d = op.shape[0]
    total = d ** n_sites
    out = np.zeros((total, total), dtype=complex)
    for m in range(n_sites):
        out += embed_at_site(op, m, n_sites)
    return out


@dataclass(frozen=True)
class CollectiveOps:
    n_sites: int
    single_site_ops: tuple
    collective: tuple

    def __post_init__(self):
        rep = build_permutation_rep(self.n_sites, self.single_site_ops[0].shape[0])
        worst = local_invariance_residual(list(self.collective), rep)
        if worst > 1e-12:
            raise ValueError(f"collective operators are not permutation invariant ({worst:.3e})")


def build_collective_ops(n_sites: int, single_site_ops, *, cap: int = SIZE_CAP) -> CollectiveOps:
    ops = tuple(np.asarray(v, dtype=complex) for v in single_site_ops)
    _check_size(ops[0].shape[0], n_sites, cap)
    return CollectiveOps(
        n_sites=n_sites,
        single_site_ops=ops,
        collective=tuple(collective_op(v, n_sites) for v in ops),
    )


def collective_spin(n_sites: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Collective (J_x, J_y, J_z) for N qubits."""
    return tuple(collective_op(0.5 * p, n_sites) for p in (sx, sy, sz))


def su2_algebra(n_sites: int) -> MatrixAlgebra:
    """Algebra generated by the collective spin components."""
    return generated_algebra(list(collective_spin(n_sites)))


# ---------------------------------------------------------------------------
# Model generators


def build_private_bath_generator(
    n_sites: int,
    hamiltonian: np.ndarray,
    single_site_generator: GKLSGenerator,
    *,
    tol: float = 1e-9,
    cap: int = SIZE_CAP,
) -> GKLSGenerator:
    """One identical copy of a single-site generator coupled to each site.

    Globally permutation invariant by construction, but in general not
    locally invariant: individual embedded Lindblad operators move under
    site swaps.
    """
    d = single_site_generator.dim
    total = _check_size(d, n_sites, cap)
    h = np.asarray(hamiltonian, dtype=complex)
    if h.shape != (total, total):
        raise ValueError("hamiltonian dimension does not match the product space")
    rep = build_permutation_rep(n_sites, d, cap=cap)
    res = max(float(np.max(np.abs(dag(r) @ h @ r - h))) for r in rep.generators)
    if res > tol:
        raise ValueError(f"hamiltonian is not permutation invariant (residual {res:.3e})")
    lindblad = [
        embed_at_site(v, m, n_sites)
        for v in single_site_generator.lindblad_ops
        for m in range(n_sites)
    ]
    site_h = single_site_generator.hamiltonian
    if np.max(np.abs(site_h)) > 0:
        h = h + collective_op(site_h, n_sites)
    return GKLSGenerator(h, lindblad)


def build_superradiance_generator(n_sites: int, omega: float, gamma_rate: float,
                                  *, cap: int = SIZE_CAP) -> GKLSGenerator:
    """Collective radiative decay of N two-level atoms.

    H = (omega/2) sum_m sz^(m) and a single collective Lindblad operator
    sqrt(gamma) sum_m sm^(m); locally permutation invariant.
    """
    if gamma_rate <= 0:
        raise ValueError("damping rate must be positive")
    _check_size(2, n_sites, cap)
    h = 0.5 * omega * collective_op(sz, n_sites)
    v = np.sqrt(gamma_rate) * collective_op(sm, n_sites)
    return GKLSGenerator(h, [v])


# ---------------------------------------------------------------------------
# Invariance checks


def _heisenberg_superop(obj) -> np.ndarray:
    if isinstance(obj, KrausMap) or isinstance(obj, GKLSGenerator):
        return obj.heisenberg_matrix()
    return np.asarray(obj, dtype=complex)


def global_invariance_residual(dynamics, rep: PermutationRep) -> float:
    """max_g || R_g Gamma R_g^-1 - Gamma || over the group generators.

    `dynamics` may be a KrausMap, a GKLSGenerator, or a raw Heisenberg
    superoperator matrix; the norm is the spectral norm.
    """
    s = _heisenberg_superop(dynamics)
    worst = 0.0
    for r in rep.generators:
        sg = conjugation_superop(r)
        worst = max(worst, float(np.linalg.norm(sg @ s @ dag(sg) - s, 2)))
    return worst


@dataclass(frozen=True)
class LocalInvarianceReport:
    residual: float
    invariant: bool
    containment_checked: bool
    containment_holds: bool | None


def local_invariance_residual(ops, rep: PermutationRep) -> float:
    """max over (generator, op) of || R† X R - X || (spectral norm)."""
    worst = 0.0
    for x in ops:
        x = np.asarray(x, dtype=complex)
        for r in rep.generators:
            worst = max(worst, float(np.linalg.norm(dag(r) @ x @ r - x, 2)))
    return worst


def local_invariance_check(
    ops,
    rep: PermutationRep,
    *,
    tol: float = 1e-10,
    verify_containment: bool = True,
) -> LocalInvarianceReport:
    """Site-permutation invariance of coupling operators.

    When the operators are invariant, the group algebra commutes with all of
    them, so it sits inside the commutant of {X, X†} and hence inside the
    decoherence-free algebra; that containment is verified through the
    algebra engine when requested.
    """
    residual = local_invariance_residual(ops, rep)
    invariant = residual <= tol
    holds = None
    checked = False
    if invariant and verify_containment:
        checked = True
        group_alg = rep.group_algebra()
        comm = commutant(list(ops), rep.dim)
        holds = group_alg.is_subalgebra_of(comm)
    return LocalInvarianceReport(
        residual=residual,
        invariant=invariant,
        containment_checked=checked,
        containment_holds=holds,
    )


def singlet_state() -> np.ndarray:
    """Two-qubit singlet (e01 - e10)/sqrt(2), the canonical subradiant state."""
    v = np.zeros(4, dtype=complex)
    v[1] = 1.0 / np.sqrt(2.0)
    v[2] = -1.0 / np.sqrt(2.0)
    return v
