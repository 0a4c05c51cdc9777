"""Finite-dimensional C*-algebra engine.

Computes commutants, generated algebras and Wedderburn block structure of
unital *-closed operator subspaces, and from those the decoherence-free
subalgebras of channels and semigroups: the multiplicative domain of a single
map, its stabilized intersection over iterates, the kernel of a
detailed-balance dissipator, fixed-point spaces, and the relaxation profile
onto the decoherence-free part.

All subspaces of M_n live as Frobenius-orthonormal matrix bases.  Rank
decisions use a single scale-invariant rule: singular values below
``NULLSPACE_RTOL`` times the largest one count as zero, and subspace
comparisons use principal angles with ``ANGLE_TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import polar, subspace_angles

from .channels import (
    KrausMap,
    compose,
    reduce_kraus,
)
from .lindblad import GKLSGenerator
from .operators import (
    LiouvilleMetric,
    commutator_superop,
    conjugation_superop,
    dag,
    eye,
    hermitian_part,
    left_mult_superop,
    matrix_unit,
    right_mult_superop,
    unvec,
    vec,
)

NULLSPACE_RTOL = 1e-9
ANGLE_TOL = 1e-7


# ---------------------------------------------------------------------------
# Subspace machinery (vectorized matrices, orthonormal columns)


def nullspace(mat: np.ndarray, rtol: float = NULLSPACE_RTOL, scale: float = 1.0) -> np.ndarray:
    """Orthonormal columns spanning the right nullspace of mat.

    Singular values below rtol * max(s_max, scale) count as zero; the scale
    floor keeps a numerically-zero condition matrix (s_max at rounding level)
    from being mistaken for a full-rank one.  Callers normalize their
    condition matrices so that a genuine constraint has unit magnitude.
    """
    mat = np.atleast_2d(np.asarray(mat, dtype=complex))
    _, s, vh = np.linalg.svd(mat)
    if s.size == 0:
        rank = 0
    else:
        rank = int(np.sum(s > rtol * max(s[0], scale)))
    return vh[rank:].conj().T


def orthonormal_matrix_basis(mats, rtol: float = NULLSPACE_RTOL) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of the span of the given matrices."""
    mats = [np.asarray(m, dtype=complex) for m in mats]
    if not mats:
        return []
    rows = np.stack([vec(m) for m in mats])
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return []
    keep = s > rtol * s[0]
    n = mats[0].shape[0]
    return [unvec(v, n) for v in vh[keep]]


def _basis_columns(basis) -> np.ndarray:
    return np.stack([vec(b) for b in basis], axis=1)


def principal_angles(basis_a, basis_b) -> np.ndarray:
    if not basis_a or not basis_b:
        return np.array([])
    return subspace_angles(_basis_columns(basis_a), _basis_columns(basis_b))


def subspace_contains(big, small, tol: float = ANGLE_TOL) -> bool:
    """True when span(small) is inside span(big) up to principal angle tol."""
    if not small:
        return True
    if not big:
        return False
    qs = _basis_columns(small)
    qb = _basis_columns(big)
    residual = qs - qb @ (qb.conj().T @ qs)
    return bool(np.linalg.norm(residual, 2) <= tol)


def subspaces_equal(basis_a, basis_b, tol: float = ANGLE_TOL) -> bool:
    if len(basis_a) != len(basis_b):
        return False
    if not basis_a:
        return True
    angles = principal_angles(basis_a, basis_b)
    return bool(angles.size == 0 or angles.max() <= tol)


def intersect_spans(basis_a, basis_b, rtol: float = NULLSPACE_RTOL) -> list[np.ndarray]:
    """Orthonormal basis of span(a) ∩ span(b)."""
    if not basis_a or not basis_b:
        return []
    qa = _basis_columns(basis_a)
    qb = _basis_columns(basis_b)
    null = nullspace(np.hstack([qa, -qb]), rtol)
    if null.shape[1] == 0:
        return []
    vecs = qa @ null[: qa.shape[1]]
    n = basis_a[0].shape[0]
    return orthonormal_matrix_basis([unvec(v, n) for v in vecs.T], rtol)


# ---------------------------------------------------------------------------
# MatrixAlgebra


@dataclass(frozen=True)
class MatrixAlgebra:
    """Unital *-closed operator subspace with a Frobenius-orthonormal basis."""

    basis: tuple

    @classmethod
    def from_span(cls, mats, rtol: float = NULLSPACE_RTOL) -> "MatrixAlgebra":
        return cls(tuple(orthonormal_matrix_basis(mats, rtol)))

    @property
    def matrix_dim(self) -> int:
        return self.basis[0].shape[0]

    @property
    def dim(self) -> int:
        """Dimension as a complex linear space."""
        return len(self.basis)

    def project(self, a: np.ndarray) -> np.ndarray:
        out = np.zeros_like(np.asarray(a, dtype=complex))
        for b in self.basis:
            out += b * np.sum(b.conj() * a)
        return out

    def contains(self, a: np.ndarray, tol: float = ANGLE_TOL) -> bool:
        a = np.asarray(a, dtype=complex)
        scale = max(float(np.linalg.norm(a)), 1e-300)
        return bool(np.linalg.norm(a - self.project(a)) / scale <= tol)

    def closure_residuals(self) -> dict:
        """Residuals of the unital *-algebra axioms; all should be ~0."""
        n = self.matrix_dim
        ident = eye(n)
        unit = float(np.linalg.norm(ident - self.project(ident)) / np.sqrt(n))
        adjoint = max(
            float(np.linalg.norm(dag(b) - self.project(dag(b)))) for b in self.basis
        )
        product = 0.0
        for a in self.basis:
            for b in self.basis:
                ab = a @ b
                product = max(product, float(np.linalg.norm(ab - self.project(ab))))
        return {"unit": unit, "adjoint": adjoint, "product": product}

    def validate(self, tol: float = 1e-7) -> None:
        res = self.closure_residuals()
        bad = {k: v for k, v in res.items() if v > tol}
        if bad:
            raise ValueError(f"subspace violates algebra axioms: {bad}")

    def is_subalgebra_of(self, other: "MatrixAlgebra", tol: float = ANGLE_TOL) -> bool:
        return subspace_contains(list(other.basis), list(self.basis), tol)

    def equals(self, other: "MatrixAlgebra", tol: float = ANGLE_TOL) -> bool:
        return subspaces_equal(list(self.basis), list(other.basis), tol)

    def hermitian_basis(self) -> list[np.ndarray]:
        """Basis of hermitian elements, orthonormal over the reals."""
        cands = []
        for b in self.basis:
            cands.append(hermitian_part(b))
            cands.append(hermitian_part(1j * b))
        n = self.matrix_dim
        rows = np.stack([np.concatenate([vec(m).real, vec(m).imag]) for m in cands])
        _, s, vh = np.linalg.svd(rows, full_matrices=False)
        keep = s > NULLSPACE_RTOL * s[0]
        return [unvec(v[: n * n] + 1j * v[n * n:], n) for v in vh[keep]]


def full_algebra(n: int) -> MatrixAlgebra:
    return MatrixAlgebra(tuple(matrix_unit(n, i, j) for i in range(n) for j in range(n)))


# ---------------------------------------------------------------------------
# Commutants and generated algebras


def commutant(ops, dim: int | None = None, *, rtol: float = NULLSPACE_RTOL) -> MatrixAlgebra:
    """Commutant of a set of matrices (adjoints adjoined, so the result is a *-algebra).

    Solves the joint nullspace of X -> [X, A_i] by SVD of the stacked
    commutator superoperators.
    """
    ops = [np.asarray(a, dtype=complex) for a in ops]
    # numerically-zero operators impose no constraint; normalizing them would
    # amplify rounding dirt into fake ones
    if ops:
        top = max(np.linalg.norm(a) for a in ops)
        ops = [a for a in ops if np.linalg.norm(a) > rtol * top]
    if not ops:
        if dim is None:
            raise ValueError("dim required for the commutant of the empty set")
        return full_algebra(dim)
    n = ops[0].shape[0]
    closed = []
    for a in ops:
        a = a / np.linalg.norm(a)  # unit scale so the rank floor is meaningful
        closed.append(a)
        closed.append(dag(a))
    stacked = np.vstack([commutator_superop(a) for a in closed])
    null = nullspace(stacked, rtol)
    basis = [unvec(null[:, k], n) for k in range(null.shape[1])]
    return MatrixAlgebra(tuple(basis))


def generated_algebra(ops, dim: int | None = None, *, rtol: float = NULLSPACE_RTOL) -> MatrixAlgebra:
    """Smallest unital *-algebra containing the given matrices.

    Span enrichment by pairwise products, iterated until the dimension
    stabilizes (at most n**2 rounds).
    """
    ops = [np.asarray(a, dtype=complex) for a in ops]
    if not ops:
        if dim is None:
            raise ValueError("dim required for the algebra generated by nothing")
        return MatrixAlgebra((eye(dim) / np.sqrt(dim),))
    n = ops[0].shape[0]
    seed = [eye(n)]
    for a in ops:
        seed.append(a)
        seed.append(dag(a))
    basis = orthonormal_matrix_basis(seed, rtol)
    frontier = list(basis)
    while frontier:
        products = [a @ b for a in frontier for b in basis]
        products += [b @ a for a in frontier for b in basis]
        enriched = orthonormal_matrix_basis(basis + products, rtol)
        if len(enriched) == len(basis):
            break
        # new directions only, for the next product round
        old = _basis_columns(basis)
        frontier = [
            b for b in enriched
            if np.linalg.norm(vec(b) - old @ (old.conj().T @ vec(b))) > 0.5
        ]
        basis = enriched
    return MatrixAlgebra(tuple(basis))


def double_commutant(ops, dim: int | None = None, *, rtol: float = NULLSPACE_RTOL) -> MatrixAlgebra:
    inner = commutant(ops, dim, rtol=rtol)
    return commutant(list(inner.basis), dim, rtol=rtol)


# ---------------------------------------------------------------------------
# Wedderburn block decomposition


@dataclass(frozen=True)
class BlockDecomposition:
    """Structure {(n_j, d_j)} and a unitary bringing the algebra to block-tensor form.

    conjugator† A conjugator = direct_sum_j (A_j kron 1_{d_j}) for every A in
    the algebra, with blocks ordered as listed.
    """

    blocks: tuple
    conjugator: np.ndarray

    @property
    def matrix_dim(self) -> int:
        return self.conjugator.shape[0]

    def off_block_mass(self, a: np.ndarray) -> float:
        """Largest deviation of U† a U from the block-tensor pattern."""
        t = dag(self.conjugator) @ np.asarray(a, dtype=complex) @ self.conjugator
        worst = 0.0
        offset = 0
        sizes = [nj * dj for nj, dj in self.blocks]
        for (nj, dj), size in zip(self.blocks, sizes):
            blk = t[offset:offset + size, offset:offset + size]
            four = blk.reshape(nj, dj, nj, dj)
            # factor part = partial trace over the multiplicity index
            aj = np.trace(four, axis1=1, axis2=3) / dj
            worst = max(worst, float(np.max(np.abs(blk - np.kron(aj, eye(dj))))))
            offset += size
        # anything outside the diagonal blocks
        mask = np.ones_like(t, dtype=bool)
        offset = 0
        for size in sizes:
            mask[offset:offset + size, offset:offset + size] = False
            offset += size
        if np.any(mask):
            worst = max(worst, float(np.max(np.abs(t[mask]))))
        return worst


def _cluster_eigenvalues(evals: np.ndarray, gap: float):
    """Split sorted eigenvalues into clusters separated by more than gap."""
    order = np.argsort(evals)
    groups = [[order[0]]]
    for idx in order[1:]:
        if evals[idx] - evals[groups[-1][-1]] > gap:
            groups.append([idx])
        else:
            groups[-1].append(idx)
    return groups


def _random_hermitian_element(basis, rng) -> np.ndarray:
    # real combinations of hermitian parts stay hermitian AND inside the
    # (*-closed) span; a complex re-orthonormalization would break hermiticity
    herm = []
    for b in basis:
        herm.append(hermitian_part(b))
        herm.append(hermitian_part(1j * b))
    coeffs = rng.normal(size=len(herm))
    h = sum(c * m for c, m in zip(coeffs, herm))
    return h / max(np.linalg.norm(h), 1e-300)


def _factor_matrix_units(block_basis, m: int, rng, gap: float, attempts: int):
    """Diagonal projections and partial isometries of a factor M_nj (x) 1_dj."""
    space_dim = len(block_basis)
    nj = int(round(np.sqrt(space_dim)))
    if nj * nj != space_dim or m % nj != 0:
        raise ValueError("central block is not a factor; closure residual too large")
    dj = m // nj
    if nj == 1:
        return 1, dj, [eye(m)], [eye(m)]
    for _ in range(attempts):
        h = _random_hermitian_element(block_basis, rng)
        evals, evecs = np.linalg.eigh(h)
        groups = _cluster_eigenvalues(evals, gap)
        if len(groups) != nj or any(len(g) != dj for g in groups):
            continue
        projections = []
        for g in groups:
            q = evecs[:, g]
            projections.append(q @ dag(q))
        # connect the k-th diagonal block to the first through a generic element
        col = _basis_columns(block_basis)
        coeffs = rng.normal(size=space_dim) + 1j * rng.normal(size=space_dim)
        gmat = unvec(col @ coeffs, m)
        isometries = [projections[0]]
        ok = True
        for k in range(1, nj):
            v = projections[0] @ gmat @ projections[k]
            if np.linalg.norm(v) < 1e-10:
                ok = False
                break
            u, _ = polar(v)
            # keep only the range(P_k) -> range(P_1) part
            f1k = projections[0] @ u @ projections[k]
            if np.linalg.norm(dag(f1k) @ f1k - projections[k]) > 1e-7:
                ok = False
                break
            isometries.append(f1k)
        if ok:
            return nj, dj, projections, isometries
    raise ValueError("failed to resolve the factor structure; increase attempts")


def block_decompose(
    alg: MatrixAlgebra,
    *,
    seed: int = 7,
    gap: float = 1e-6,
    attempts: int = 60,
) -> BlockDecomposition:
    """Wedderburn decomposition of a unital *-algebra.

    Randomized central-element method: eigenvalue clusters of a generic
    hermitian central element give the minimal central projections; inside
    each factor a generic hermitian element plus polar decompositions build a
    full system of matrix units, from which the conjugating unitary follows.
    Deterministic for a fixed seed; draws are repeated when eigenvalue
    clusters fall within the gap tolerance.
    """
    alg.validate(1e-6)
    n = alg.matrix_dim
    if alg.dim == n * n:
        return BlockDecomposition(blocks=((n, 1),), conjugator=eye(n))
    rng = np.random.default_rng(seed)
    center = intersect_spans(list(alg.basis), list(commutant(list(alg.basis)).basis))
    m_blocks = len(center)

    for _ in range(attempts):
        z = sum(
            c * m for c, m in zip(rng.normal(size=m_blocks), [hermitian_part(b) for b in center])
        )
        extra = sum(
            c * m
            for c, m in zip(rng.normal(size=m_blocks), [hermitian_part(1j * b) for b in center])
        )
        z = z + extra
        z = z / max(np.linalg.norm(z), 1e-300)
        evals, evecs = np.linalg.eigh(z)
        groups = _cluster_eigenvalues(evals, gap)
        if len(groups) != m_blocks:
            continue

        pieces = []
        try:
            for g in groups:
                q = evecs[:, g]  # n x m_j isometry onto the central block
                m = q.shape[1]
                compressed = orthonormal_matrix_basis([dag(q) @ b @ q for b in alg.basis])
                nj, dj, projections, isometries = _factor_matrix_units(
                    compressed, m, rng, gap, attempts
                )
                # columns of the block conjugator: f_1k† applied to a basis of range(f_11)
                p1_evals, p1_vecs = np.linalg.eigh(projections[0])
                xi = p1_vecs[:, p1_evals > 0.5]
                cols = []
                for k in range(nj):
                    fk1 = dag(isometries[k])
                    for s in range(dj):
                        cols.append(fk1 @ xi[:, s])
                u_block = q @ np.stack(cols, axis=1)
                pieces.append((nj, dj, u_block))
        except ValueError:
            continue

        pieces.sort(key=lambda t: (-t[0], -t[1]))
        conj = np.hstack([u for (_, _, u) in pieces])
        if np.linalg.norm(dag(conj) @ conj - eye(n)) > 1e-8:
            continue
        blocks = tuple((nj, dj) for nj, dj, _ in pieces)
        if sum(nj * dj for nj, dj in blocks) != n:
            continue
        decomp = BlockDecomposition(blocks=blocks, conjugator=conj)
        worst = max(decomp.off_block_mass(b) for b in alg.basis)
        if worst <= 1e-8:
            return decomp
    raise ValueError("block decomposition did not converge; algebra may be ill-conditioned")


# ---------------------------------------------------------------------------
# Decoherence-free subalgebras


def multiplicative_domain(channel: KrausMap, *, rtol: float = NULLSPACE_RTOL) -> MatrixAlgebra:
    """Largest *-subalgebra on which the unital CP map is multiplicative.

    Computed from the linear characterization via the Stinespring isometry:
    A belongs iff  A W_a = W_a Gamma(A)  and  W_a† A = Gamma(A) W_a†  for
    every Kraus operator W_a.  Channels that reduce to a single Kraus
    operator are unitary and return the full matrix algebra.
    """
    reduced = reduce_kraus(channel)
    n = reduced.dim
    if len(reduced.kraus_ops) == 1:
        return full_algebra(n)
    g = reduced.heisenberg_matrix()
    rows = []
    for w in reduced.kraus_ops:
        rows.append(right_mult_superop(w) - left_mult_superop(w) @ g)
        rows.append(left_mult_superop(dag(w)) - right_mult_superop(dag(w)) @ g)
    null = nullspace(np.vstack(rows), rtol)
    basis = tuple(unvec(null[:, k], n) for k in range(null.shape[1]))
    return MatrixAlgebra(basis)


@dataclass(frozen=True)
class DiscreteDFResult:
    algebra: MatrixAlgebra
    k_used: int
    certificate: str  # "exact" | "heuristic" | "max-k"


def df_algebra_discrete(
    channel: KrausMap,
    max_k: int = 25,
    *,
    rtol: float = NULLSPACE_RTOL,
    detailed_balance: "DetailedBalanceChannel | None" = None,
) -> DiscreteDFResult:
    """Observables evolving reversibly under every iterate of the map.

    Cumulative intersection of the multiplicative domains of Gamma^k, stopped
    once the dimension has been stable for n**2 consecutive steps (reported
    as a heuristic certificate) or at max_k.  Reaching the trivial algebra
    span{1}, or matching the fixed-point space of the dissipative factor of a
    supplied detailed-balance structure, upgrades the certificate to exact.
    """
    if max_k < 1:
        raise ValueError("max_k must be at least 1")
    n = channel.dim
    current = multiplicative_domain(channel, rtol=rtol)
    gamma_k = channel
    k_used = 1
    streak = 1
    certificate = "max-k"
    for k in range(2, max_k + 1):
        if current.dim == 1:
            certificate = "exact"
            break
        gamma_k = compose(channel, gamma_k)
        nk = multiplicative_domain(gamma_k, rtol=rtol)
        merged = intersect_spans(list(current.basis), list(nk.basis), rtol)
        new = MatrixAlgebra(tuple(merged))
        streak = streak + 1 if new.dim == current.dim else 1
        current = new
        k_used = k
        if streak >= n * n:
            certificate = "heuristic"
            break
    else:
        if current.dim == 1:
            certificate = "exact"
    if detailed_balance is not None:
        fixed = fixed_points(detailed_balance.dissipative, rtol=rtol)
        if subspaces_equal(list(current.basis), list(fixed.basis)):
            certificate = "exact"
    return DiscreteDFResult(algebra=current, k_used=k_used, certificate=certificate)


@dataclass(frozen=True)
class SemigroupDFResult:
    algebra: MatrixAlgebra
    certificate: str  # "exact" | "lower-bound" | "lower-bound-unverified"
    commuting_parts: bool


def df_algebra_semigroup(
    gen: GKLSGenerator,
    metric: LiouvilleMetric | None = None,
    *,
    rtol: float = NULLSPACE_RTOL,
    tol: float = 1e-8,
) -> SemigroupDFResult:
    """Observables evolving reversibly under the whole semigroup.

    With a detailed-balance metric the answer is exact: the kernel of the
    dissipator superoperator.  Without one, the commutant of the Lindblad
    operators and their adjoints (intersected with that kernel) is returned;
    it is a certified lower bound when the Hamiltonian and dissipative parts
    commute, and an unverified one otherwise.
    """
    from .lindblad import detailed_balance_check

    s_d = gen.dissipator_matrix()
    if metric is not None:
        report = detailed_balance_check(gen, metric, tol)
        if not report.passed:
            raise ValueError(f"detailed balance claimed but fails: {report.residuals}")
        null = nullspace(s_d, rtol)
        basis = tuple(unvec(null[:, k], gen.dim) for k in range(null.shape[1]))
        return SemigroupDFResult(
            algebra=MatrixAlgebra(basis), certificate="exact", commuting_parts=True
        )

    comm = commutant(list(gen.lindblad_ops), gen.dim, rtol=rtol)
    null = nullspace(s_d, rtol)
    kernel = [unvec(null[:, k], gen.dim) for k in range(null.shape[1])]
    basis = intersect_spans(list(comm.basis), kernel, rtol)
    s_h = gen.hamiltonian_matrix()
    scale = max(np.linalg.norm(s_h, 2) * np.linalg.norm(s_d, 2), 1.0)
    commuting = bool(np.linalg.norm(s_h @ s_d - s_d @ s_h, 2) / scale <= tol)
    certificate = "lower-bound" if commuting else "lower-bound-unverified"
    return SemigroupDFResult(
        algebra=MatrixAlgebra(tuple(basis)), certificate=certificate, commuting_parts=commuting
    )


# ---------------------------------------------------------------------------
# Fixed points


@dataclass(frozen=True)
class FixedPointResult:
    basis: tuple
    stationary_state: np.ndarray | None
    faithful: bool
    certified_algebra: bool

    @property
    def dim(self) -> int:
        return len(self.basis)

    def as_algebra(self) -> MatrixAlgebra:
        return MatrixAlgebra(self.basis)


def fixed_points(channel: KrausMap, *, rtol: float = NULLSPACE_RTOL) -> FixedPointResult:
    """Fixed-point space {A : Gamma(A) = A}, with an algebra certificate.

    A stationary state is extracted from the peripheral spectral projector at
    eigenvalue one applied to the maximally mixed state; when it is faithful
    the fixed-point space is a *-algebra (and then product closure is
    verified numerically).
    """
    n = channel.dim
    s = channel.heisenberg_matrix()
    ident = eye(n * n)
    right = nullspace(s - ident, rtol)            # fixed observables
    left = nullspace(dag(s) - ident, rtol)        # stationary-state subspace
    basis = tuple(unvec(right[:, k], n) for k in range(right.shape[1]))

    sigma = None
    faithful = False
    if left.shape[1] > 0:
        # spectral projector at eigenvalue 1: P = N (M† N)^-1 M† with
        # N = stationary states, M = fixed observables (semisimple eigenvalue)
        try:
            core = np.linalg.solve(dag(right) @ left, dag(right) @ vec(eye(n) / n))
            cand = unvec(left @ core, n)
            cand = hermitian_part(cand)
            tr = np.trace(cand).real
            if abs(tr) > 1e-12:
                cand = cand / tr
                evals = np.linalg.eigvalsh(cand)
                if evals.min() > -1e-10:
                    sigma = cand
                    faithful = bool(evals.min() > 1e-10)
        except np.linalg.LinAlgError:
            sigma = None

    certified = False
    if faithful and basis:
        algebra = MatrixAlgebra(basis)
        certified = algebra.closure_residuals()["product"] <= 1e-7
    return FixedPointResult(
        basis=basis, stationary_state=sigma, faithful=faithful, certified_algebra=certified
    )


# ---------------------------------------------------------------------------
# Commutant lower bounds for a map split into unitary and dissipative parts


@dataclass(frozen=True)
class CommutantBounds:
    """Nested commutant lower bounds for the DF algebras of U * Gamma_D.

    of_ops        = {W_a, W_a†}'            (inside of_pair_products)
    of_pair_products = {W_a W_b†}'          (inside the multiplicative domain)
    of_all_products  = {W_a W_b, W_a W_b†, W_a† W_b†}'  (inside the global DF
                      algebra; only defined when the unitary part commutes
                      with the dissipative one)
    """

    of_ops: MatrixAlgebra
    of_pair_products: MatrixAlgebra
    of_all_products: MatrixAlgebra | None
    unitary_commutes: bool


def commutant_bounds(
    unitary: np.ndarray,
    dissipative: KrausMap,
    *,
    rtol: float = NULLSPACE_RTOL,
    tol: float = 1e-8,
) -> CommutantBounds:
    ops = list(dissipative.kraus_ops)
    n = dissipative.dim
    w1 = commutant(ops, n, rtol=rtol)
    pairs = [a @ dag(b) for a in ops for b in ops]
    w2 = commutant(pairs, n, rtol=rtol)

    s_u = conjugation_superop(np.asarray(unitary, dtype=complex))
    s_d = dissipative.heisenberg_matrix()
    commutes = bool(np.linalg.norm(s_u @ s_d - s_d @ s_u, 2) <= tol * max(np.linalg.norm(s_d, 2), 1.0))
    w3 = None
    if commutes:
        prods = [a @ b for a in ops for b in ops]
        prods += [a @ dag(b) for a in ops for b in ops]
        prods += [dag(a) @ dag(b) for a in ops for b in ops]
        w3 = commutant(prods, n, rtol=rtol)
    return CommutantBounds(
        of_ops=w1, of_pair_products=w2, of_all_products=w3, unitary_commutes=commutes
    )


# ---------------------------------------------------------------------------
# Detailed-balance channels and the relaxation profile


@dataclass(frozen=True)
class DetailedBalanceChannel:
    """Channel Gamma = U-conjugation composed with a sigma-hermitian CP factor.

    Validated on construction: the two factors commute, the dissipative
    factor is hermitian in the sigma inner product, sigma is stationary and
    invariant under the unitary part.
    """

    unitary: np.ndarray
    dissipative: KrausMap
    metric: LiouvilleMetric
    tol: float = 1e-7

    def __post_init__(self):
        u = np.asarray(self.unitary, dtype=complex)
        n = self.dissipative.dim
        if u.shape != (n, n):
            raise ValueError("unitary dimension does not match the dissipative part")
        if np.linalg.norm(dag(u) @ u - eye(n)) > self.tol:
            raise ValueError("unitary part is not unitary within tolerance")
        s_u = conjugation_superop(u)
        s_d = self.dissipative.heisenberg_matrix()
        if np.linalg.norm(s_u @ s_d - s_d @ s_u, 2) > self.tol * max(np.linalg.norm(s_d, 2), 1.0):
            raise ValueError("unitary and dissipative parts do not commute")
        g = self.metric.gram_superop()
        if np.max(np.abs(g @ s_d - dag(s_d) @ g)) > self.tol:
            raise ValueError("dissipative part is not hermitian in the metric")
        sigma = self.metric.sigma
        if np.max(np.abs(u @ sigma - sigma @ u)) > self.tol:
            raise ValueError("metric state is not invariant under the unitary part")
        total = dag(s_u @ s_d)
        if np.max(np.abs(unvec(total @ vec(sigma), n) - sigma)) > self.tol:
            raise ValueError("metric state is not stationary for the channel")
        object.__setattr__(self, "unitary", u)

    @property
    def dim(self) -> int:
        return self.dissipative.dim

    def heisenberg_matrix(self) -> np.ndarray:
        return conjugation_superop(self.unitary) @ self.dissipative.heisenberg_matrix()

    def channel(self) -> KrausMap:
        from .channels import channel_from_superop

        return channel_from_superop(self.heisenberg_matrix(), tol=1e-7)


def detailed_balance_channel_from_gibbs(gibbs, t: float = 1.0) -> DetailedBalanceChannel:
    """One time step exp(t L) of a Gibbs generator, split as U * Gamma_D."""
    from scipy.linalg import expm

    from .channels import channel_from_superop

    if t <= 0:
        raise ValueError("time step must be positive")
    u = expm(-1j * t * gibbs.hamiltonian)
    gamma_d = channel_from_superop(expm(t * gibbs.generator.dissipator_matrix()), tol=1e-7)
    return DetailedBalanceChannel(
        unitary=u, dissipative=gamma_d, metric=gibbs.metric()
    )


def df_projector_basis(db: DetailedBalanceChannel, *, rtol: float = NULLSPACE_RTOL):
    """Metric-orthonormal basis of the fixed space of the dissipative factor."""
    n = db.dim
    s_d = db.dissipative.heisenberg_matrix()
    null = nullspace(s_d - eye(n * n), rtol)
    raw = [unvec(null[:, k], n) for k in range(null.shape[1])]
    # Gram-Schmidt in the sigma inner product
    basis = []
    for a in raw:
        for b in basis:
            a = a - b * db.metric.inner(b, a)
        norm = db.metric.norm(a)
        if norm > 1e-12:
            basis.append(a / norm)
    return basis


def df_project(db: DetailedBalanceChannel, a: np.ndarray, basis=None) -> np.ndarray:
    basis = df_projector_basis(db) if basis is None else basis
    out = np.zeros_like(np.asarray(a, dtype=complex))
    for b in basis:
        out += b * db.metric.inner(b, a)
    return out


@dataclass(frozen=True)
class RelaxationTrace:
    errors: np.ndarray            # ||Gamma^k(A) - U^k(P A)||_sigma for k = 0..k_max
    projected: np.ndarray         # P A
    dissipative_gap: float        # second largest singular value of Gamma_D in the metric
    rate_estimate: float | None   # geometric-fit decay ratio, None when the trace is ~0


def relaxation_trace(db: DetailedBalanceChannel, a: np.ndarray, k_max: int = 20) -> RelaxationTrace:
    """Distance of the iterated map from the reversibly-rotated DF projection.

    The sequence is non-increasing and decays at worst geometrically with the
    second-largest singular value of the dissipative factor in the metric.
    """
    a = np.asarray(a, dtype=complex)
    basis = df_projector_basis(db)
    pa = df_project(db, a, basis)
    u = db.unitary
    gamma = db.heisenberg_matrix()

    errors = []
    current = a.copy()
    rotated = pa.copy()
    for _ in range(k_max + 1):
        errors.append(db.metric.norm(current - rotated))
        current = unvec(gamma @ vec(current), db.dim)
        rotated = dag(u) @ rotated @ u
    errors = np.array(errors)

    # spectrum of Gamma_D as a metric-hermitian operator: real, in [-1, 1]
    evals = np.linalg.eigvals(db.dissipative.heisenberg_matrix())
    mags = np.sort(np.abs(evals))[::-1]
    gap = float(mags[len(basis)]) if len(mags) > len(basis) else 0.0

    rate = None
    good = errors > 1e-13
    if np.count_nonzero(good) >= 3:
        ks = np.nonzero(good)[0]
        coeffs = np.polyfit(ks, np.log(errors[ks]), 1)
        rate = float(np.exp(coeffs[0]))
    return RelaxationTrace(
        errors=errors, projected=pa, dissipative_gap=gap, rate_estimate=rate
    )


# ---------------------------------------------------------------------------
# Unitary implementing a channel on its multiplicative domain


def implementing_unitary(
    channel: KrausMap,
    alg: MatrixAlgebra,
    *,
    seed: int = 11,
    attempts: int = 8,
) -> np.ndarray:
    """A unitary U with Gamma(A) = U† A U for all A in the algebra.

    The solution space of the linear intertwining condition
    A X = X Gamma(A) contains an invertible element whenever the channel acts
    as an automorphism on the algebra; the polar factor of a generic element
    is then a valid unitary.  The returned unitary is one valid choice, fixed
    by the seed (the block phase freedom is not canonicalized).
    """
    n = channel.dim
    rows = []
    for b in alg.basis:
        rows.append(left_mult_superop(b) - right_mult_superop(channel(b)))
    null = nullspace(np.vstack(rows))
    if null.shape[1] == 0:
        raise ValueError("no intertwiner exists; is the subspace really invariant?")
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        coeffs = rng.normal(size=null.shape[1]) + 1j * rng.normal(size=null.shape[1])
        x = unvec(null @ coeffs, n)
        if np.linalg.cond(x) > 1e10:
            continue
        u, _ = polar(x)
        residual = max(
            float(np.max(np.abs(dag(u) @ b @ u - channel(b)))) for b in alg.basis
        )
        if residual <= 1e-8:
            return u
    raise ValueError("failed to find a unitary intertwiner")
