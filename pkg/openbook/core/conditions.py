"""
Junction Condition Calculus - rank, ellipticity and self-adjointness tests for the
binding matrices (A, C), the canonical unitary form and left-equivalence of pairs.

A pair encodes A u|_B + C du/dnu = 0 with outward normal derivatives. Matrices are
either constant along the binding or sampled once per binding node.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy import linalg

from .errors import ConditionError

logger = logging.getLogger(__name__)

RANK_RTOL = 1e-12
HERMITIAN_RTOL = 1e-10
REALITY_WINDOW = 1e-9
POSITIVITY_FLOOR = 1e-12
ANGLE_TOL = 1e-9
UNITARY_TOL = 1e-10
INVERTIBILITY_COND = 1e12
INFINITE_RATIO = 1e12

# Fixed complex sample points for detecting det(A - lambda C) == 0 identically.
_PENCIL_SAMPLES = (0.7071 + 0.3183j, -1.2915 + 2.0811j, 2.8765 - 0.4142j)


class Sampling(str, Enum):
    CONSTANT = "constant"
    PER_NODE = "per-node"


class ConditionName(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    KIRCHHOFF = "kirchhoff"
    DELTA = "delta"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class ConditionPair:
    """Binding matrices (A, C); shape (k, k) when constant, (n, k, k) per node."""

    A: np.ndarray
    C: np.ndarray
    sampling: Sampling = Sampling.CONSTANT
    label: Optional[str] = None

    def __post_init__(self):
        A = np.array(self.A, dtype=complex)
        C = np.array(self.C, dtype=complex)
        sampling = Sampling(self.sampling)
        expected_ndim = 2 if sampling == Sampling.CONSTANT else 3
        if A.ndim != expected_ndim or C.shape != A.shape:
            raise ConditionError(
                f"{sampling.value} condition needs A and C of equal {expected_ndim}-d shape, "
                f"got {A.shape} and {C.shape}"
            )
        if A.shape[-1] != A.shape[-2] or A.shape[-1] < 1:
            raise ConditionError(f"condition matrices must be square k x k with k >= 1, got {A.shape}")
        if sampling == Sampling.PER_NODE and A.shape[0] < 1:
            raise ConditionError("per-node condition needs at least one sample")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(C))):
            raise ConditionError("condition matrices must have finite entries")
        A.setflags(write=False)
        C.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "sampling", sampling)

    @property
    def k(self) -> int:
        return self.A.shape[-1]

    @property
    def n_samples(self) -> int:
        return 1 if self.sampling == Sampling.CONSTANT else self.A.shape[0]

    def at(self, node: int = 0) -> Tuple[np.ndarray, np.ndarray]:
        if self.sampling == Sampling.CONSTANT:
            return self.A, self.C
        return self.A[node], self.C[node]

    def samples(self) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
        for node in range(self.n_samples):
            yield self.at(node)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, ConditionPair):
            return NotImplemented
        return (
            self.sampling == other.sampling
            and self.label == other.label
            and self.A.shape == other.A.shape
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.C, other.C)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CanonicalUnitary:
    """Unitary U of i(U - I)u + (U + I)du/dnu = 0; stacked per node when sampled."""

    U: np.ndarray
    unitarity_defect: float = field(init=False)

    def __post_init__(self):
        U = np.array(self.U, dtype=complex)
        if U.ndim not in (2, 3) or U.shape[-1] != U.shape[-2]:
            raise ConditionError(f"unitary must be k x k (or n x k x k), got {U.shape}")
        k = U.shape[-1]
        identity = np.eye(k)
        stacked = U if U.ndim == 3 else U[np.newaxis]
        defect = max(
            float(np.linalg.norm(sample @ sample.conj().T - identity)) for sample in stacked
        )
        if defect > UNITARY_TOL * k:
            raise ConditionError(f"matrix is not unitary (defect {defect:.3e})")
        U.setflags(write=False)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "unitarity_defect", defect)

    @property
    def k(self) -> int:
        return self.U.shape[-1]

    @property
    def per_node(self) -> bool:
        return self.U.ndim == 3


class Ellipticity(NamedTuple):
    elliptic: bool
    violating: Optional[float]


@dataclass(frozen=True)
class ConditionReport:
    k: int
    rank: int
    elliptic: bool
    violating_lambda: Optional[float]
    violating_node: Optional[int]
    selfadjoint_defect: float
    selfadjoint_tolerance: float
    canonical: Optional[CanonicalUnitary]
    sample_variation: Optional[float] = None

    @property
    def selfadjoint(self) -> bool:
        return self.rank == self.k and self.selfadjoint_defect <= self.selfadjoint_tolerance


def _rank(block: np.ndarray) -> int:
    singular = linalg.svdvals(block)
    if singular.size == 0 or singular[0] == 0.0:
        return 0
    return int(np.sum(singular > RANK_RTOL * singular[0]))


def _row_space(block: np.ndarray) -> np.ndarray:
    """Orthonormal basis (as columns) of the row space of a k x 2k block."""
    _, singular, vh = linalg.svd(block)
    if singular.size == 0 or singular[0] == 0.0:
        return np.zeros((block.shape[1], 0), dtype=complex)
    rank = int(np.sum(singular > RANK_RTOL * singular[0]))
    return vh[:rank].T


def check_rank(pair: ConditionPair) -> int:
    """Numerical rank of (A, C); the minimum over samples for per-node pairs."""
    return min(_rank(np.hstack([A, C])) for A, C in pair.samples())


def _identically_singular(A: np.ndarray, C: np.ndarray) -> bool:
    scale_a = np.linalg.norm(A)
    scale_c = np.linalg.norm(C)
    for mu in _PENCIL_SAMPLES:
        smallest = linalg.svdvals(A - mu * C)[-1]
        if smallest > 1e-12 * (scale_a + abs(mu) * scale_c):
            return False
    return True


def _pencil_violation(A: np.ndarray, C: np.ndarray) -> Ellipticity:
    if _identically_singular(A, C):
        return Ellipticity(False, None)
    scale_a = np.linalg.norm(A)
    scale_c = np.linalg.norm(C)
    alpha, beta = linalg.eig(A, C, right=False, homogeneous_eigvals=True)
    violations = []
    for a, b in zip(alpha, beta):
        if abs(b) * INFINITE_RATIO <= abs(a):
            continue
        lam = a / b
        if abs(lam.imag) > REALITY_WINDOW * (1.0 + abs(lam)):
            continue
        if lam.real <= POSITIVITY_FLOOR:
            continue
        residual = linalg.svdvals(A - lam.real * C)[-1]
        if residual > 1e-8 * (scale_a + lam.real * scale_c):
            continue
        violations.append(float(lam.real))
    if violations:
        return Ellipticity(False, min(violations))
    return Ellipticity(True, None)


def _ellipticity_by_node(pair: ConditionPair) -> Tuple[Ellipticity, Optional[int]]:
    for node, (A, C) in enumerate(pair.samples()):
        verdict = _pencil_violation(A, C)
        if not verdict.elliptic:
            return verdict, node
    return Ellipticity(True, None), None


def check_ellipticity(pair: ConditionPair) -> Ellipticity:
    """det(A - lambda C) != 0 for every lambda > 0, at every sample."""
    verdict, node = _ellipticity_by_node(pair)
    if not verdict.elliptic:
        logger.debug("ellipticity fails at node %s, lambda=%s", node, verdict.violating)
    return verdict


def selfadjoint_tolerance(pair: ConditionPair) -> float:
    return max(
        HERMITIAN_RTOL * (np.linalg.norm(A, 2) * np.linalg.norm(C, 2) + 1.0)
        for A, C in pair.samples()
    )


def check_selfadjoint(pair: ConditionPair) -> float:
    """Frobenius norm of AC* - (AC*)*, maximized over samples."""
    defects = []
    for A, C in pair.samples():
        product = A @ C.conj().T
        defects.append(float(np.linalg.norm(product - product.conj().T)))
    return max(defects)


def is_selfadjoint(pair: ConditionPair) -> bool:
    return check_rank(pair) == pair.k and check_selfadjoint(pair) <= selfadjoint_tolerance(pair)


def _sigma_matrix(A: np.ndarray, C: np.ndarray, z: float) -> np.ndarray:
    P = A + 1j * z * C
    if not np.isfinite(np.linalg.cond(P)) or np.linalg.cond(P) > INVERTIBILITY_COND:
        raise ConditionError(
            "Lemma hypotheses violated: A + izC is singular (rank(A, C) < k or AC* not Hermitian)"
        )
    return -np.linalg.solve(P, A - 1j * z * C)


def sigma(pair: ConditionPair, z: float, node: Optional[int] = None) -> np.ndarray:
    """sigma(z) = -(A + izC)^-1 (A - izC); stacked over nodes for sampled pairs."""
    z = float(z)
    if z == 0.0 or not np.isfinite(z):
        raise ConditionError("z must be a nonzero real number")
    if pair.sampling == Sampling.CONSTANT or node is not None:
        A, C = pair.at(node or 0)
        return _sigma_matrix(A, C, z)
    return np.stack([_sigma_matrix(A, C, z) for A, C in pair.samples()])


def canonical_unitary(pair: ConditionPair) -> CanonicalUnitary:
    U = sigma(pair, -1.0)
    forward = sigma(pair, 1.0)
    identity = np.eye(pair.k)
    mismatch = float(np.max(np.linalg.norm(forward @ U - identity, axis=(-2, -1))))
    if mismatch > UNITARY_TOL * pair.k:
        raise ConditionError(f"sigma(1) sigma(-1) differs from I by {mismatch:.3e}")
    return CanonicalUnitary(U)


def pair_from_unitary(unitary: Union[CanonicalUnitary, np.ndarray]) -> ConditionPair:
    if not isinstance(unitary, CanonicalUnitary):
        unitary = CanonicalUnitary(unitary)
    U = unitary.U
    identity = np.eye(unitary.k)
    sampling = Sampling.PER_NODE if unitary.per_node else Sampling.CONSTANT
    return ConditionPair(1j * (U - identity), U + identity, sampling)


def sigma_family_pair(pair: ConditionPair, z: float) -> ConditionPair:
    """(i(sigma(z) - I), -(1/z)(sigma(z) + I)): an equivalent self-adjoint representative."""
    S = sigma(pair, z)
    identity = np.eye(pair.k)
    return ConditionPair(1j * (S - identity), -(S + identity) / z, pair.sampling)


def adjoint_pair(pair: ConditionPair) -> ConditionPair:
    """Condition cut out by the adjoint boundary values (v, dv) = (-C* h, A* h)."""
    A_rows: List[np.ndarray] = []
    C_rows: List[np.ndarray] = []
    k = pair.k
    for A, C in pair.samples():
        values = np.vstack([-C.conj().T, A.conj().T])
        rows = linalg.null_space(values.T).T
        if rows.shape[0] != k:
            raise ConditionError(f"adjoint condition needs rank(A, C) = {k}, got {2 * k - rows.shape[0]}")
        A_rows.append(rows[:, :k])
        C_rows.append(rows[:, k:])
    if pair.sampling == Sampling.CONSTANT:
        return ConditionPair(A_rows[0], C_rows[0])
    return ConditionPair(np.stack(A_rows), np.stack(C_rows), Sampling.PER_NODE)


def equivalent(p: ConditionPair, q: ConditionPair) -> bool:
    """True when (A_p, C_p) and (A_q, C_q) have the same row space at every sample."""
    if p.k != q.k:
        raise ConditionError(f"cannot compare conditions of sizes {p.k} and {q.k}")
    if p.sampling == q.sampling == Sampling.PER_NODE and p.n_samples != q.n_samples:
        raise ConditionError(f"sample counts differ: {p.n_samples} vs {q.n_samples}")
    count = max(p.n_samples, q.n_samples)
    for node in range(count):
        Ap, Cp = p.at(node)
        Aq, Cq = q.at(node)
        basis_p = _row_space(np.hstack([Ap, Cp]))
        basis_q = _row_space(np.hstack([Aq, Cq]))
        if basis_p.shape[1] != basis_q.shape[1]:
            return False
        if basis_p.shape[1] == 0:
            continue
        if np.max(linalg.subspace_angles(basis_p, basis_q)) > ANGLE_TOL:
            return False
    return True


def _kirchhoff_matrices(k: int) -> Tuple[np.ndarray, np.ndarray]:
    A = np.zeros((k, k), dtype=complex)
    C = np.zeros((k, k), dtype=complex)
    for row in range(k - 1):
        A[row, row] = 1.0
        A[row, row + 1] = -1.0
    C[k - 1, :] = 1.0
    return A, C


def named_condition(name: str, k: int, params: Optional[Dict[str, Any]] = None) -> ConditionPair:
    """Standard vertex conditions: dirichlet, neumann, kirchhoff, delta(alpha), custom(A, C)."""
    params = params or {}
    if k < 1:
        raise ConditionError(f"condition size must be >= 1, got {k}")
    try:
        kind = ConditionName(str(name).strip().lower())
    except ValueError:
        raise ConditionError(f"unknown condition '{name}'") from None

    if kind == ConditionName.DIRICHLET:
        return ConditionPair(np.eye(k), np.zeros((k, k)), label="dirichlet")
    if kind == ConditionName.NEUMANN:
        return ConditionPair(np.zeros((k, k)), np.eye(k), label="neumann")
    if kind == ConditionName.KIRCHHOFF:
        A, C = _kirchhoff_matrices(k)
        return ConditionPair(A, C, label="kirchhoff")
    if kind == ConditionName.DELTA:
        alpha = float(params.get("alpha", 0.0))
        A, C = _kirchhoff_matrices(k)
        A[k - 1, 0] = -alpha
        return ConditionPair(A, C, label=f"delta {alpha!r}")

    if "A" not in params or "C" not in params:
        raise ConditionError("custom condition needs both A and C")
    pair = ConditionPair(params["A"], params["C"], Sampling(params.get("sampling", Sampling.CONSTANT)))
    if pair.k != k:
        raise ConditionError(f"condition size mismatch: {k} slots but {pair.k}x{pair.k} matrices")
    return pair


def condition_report(pair: ConditionPair) -> ConditionReport:
    rank = check_rank(pair)
    verdict, node = _ellipticity_by_node(pair)
    defect = check_selfadjoint(pair)
    tolerance = selfadjoint_tolerance(pair)

    canonical = None
    if rank == pair.k and defect <= tolerance:
        try:
            canonical = canonical_unitary(pair)
        except ConditionError as exc:
            logger.warning("canonical form unavailable despite passing checks: %s", exc)

    variation = None
    if pair.sampling == Sampling.PER_NODE and pair.n_samples > 1:
        if canonical is not None:
            steps = np.diff(canonical.U, axis=0)
        else:
            steps = np.diff(np.concatenate([pair.A, pair.C], axis=-1), axis=0)
        variation = float(np.max(np.linalg.norm(steps, axis=(-2, -1))))

    return ConditionReport(
        k=pair.k,
        rank=rank,
        elliptic=verdict.elliptic,
        violating_lambda=verdict.violating,
        violating_node=node,
        selfadjoint_defect=defect,
        selfadjoint_tolerance=tolerance,
        canonical=canonical,
        sample_variation=variation,
    )
