"""
Eigensolve Engine - lowest eigenpairs of the reduced pencil (K_red, M_red) by
shift-invert Krylov iteration, residual certification, multiplicity clustering,
and a dense reference path used as ground truth.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, sparse
from scipy.sparse import linalg as sparse_linalg

from .discretize import ReducedSystem
from .errors import DimensionCapError, DimensionMismatchError, ShiftCollisionError

logger = logging.getLogger(__name__)

DENSE_CAP = 4000
DENSE_BELOW = 40
HERMITIAN_DEFECT = 1e-14
PIVOT_RTOL = 1e-14
DEFAULT_CLUSTER_TOL = 1e-6


@dataclass
class SpectrumResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    vectors: Optional[np.ndarray] = None
    cluster_ids: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    modes: List[Optional[int]] = field(default_factory=list)
    symmetry_defect: float = 0.0
    orthogonality_defect: float = 0.0
    converged: bool = True
    method: str = "dense"
    certified: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.certified is None:
            self.certified = np.ones(len(self.eigenvalues), dtype=bool)

    def __len__(self) -> int:
        return len(self.eigenvalues)

    @property
    def real_parts(self) -> np.ndarray:
        return np.real(self.eigenvalues)

    def clusters(self) -> List[Tuple[complex, int]]:
        """(mean value, multiplicity) per cluster, in order."""
        summary = []
        for cluster in np.unique(self.cluster_ids):
            members = self.eigenvalues[self.cluster_ids == cluster]
            summary.append((complex(np.mean(members)), int(members.size)))
        return summary

    def max_imaginary_ratio(self) -> float:
        """max |Im lambda| / (1 + |lambda|)."""
        if not len(self):
            return 0.0
        return float(np.max(np.abs(self.eigenvalues.imag) / (1.0 + np.abs(self.eigenvalues))))


def cluster_eigenvalues(values: Sequence[complex], tol: float = DEFAULT_CLUSTER_TOL) -> np.ndarray:
    """Cluster ids for values sorted by real part; neighbours within tol (1 + |lambda|) share one."""
    ids = np.zeros(len(values), dtype=int)
    for i in range(1, len(values)):
        previous = values[i - 1]
        same = abs(values[i] - previous) <= tol * (1.0 + abs(previous))
        ids[i] = ids[i - 1] if same else ids[i - 1] + 1
    return ids


def _m_normalize(vectors: np.ndarray, M) -> np.ndarray:
    norms = np.sqrt(np.abs(np.einsum("ij,ij->j", vectors.conj(), M @ vectors)))
    norms[norms == 0.0] = 1.0
    return vectors / norms


def orthogonality_defect(vectors: np.ndarray, M, cluster_ids: np.ndarray) -> float:
    """max |x_i^H M x_j| over M-normalized vectors from different clusters."""
    if vectors is None or vectors.shape[1] < 2:
        return 0.0
    gram = np.abs(vectors.conj().T @ (M @ vectors))
    different = cluster_ids[:, np.newaxis] != cluster_ids[np.newaxis, :]
    if not np.any(different):
        return 0.0
    return float(np.max(gram[different]))


def residual(system: ReducedSystem, pair: Tuple[complex, np.ndarray]) -> float:
    """||K x - lambda M x|| / (||K||_F ||x||)."""
    value, x = pair
    x = np.asarray(x)
    if x.ndim != 1 or x.size != system.dimension:
        raise DimensionMismatchError(f"vector of size {x.size} for a system of dimension {system.dimension}")
    scale = sparse_linalg.norm(system.K) * np.linalg.norm(x)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(system.K @ x - value * (system.M @ x)) / scale)


def _is_hermitian(system: ReducedSystem) -> bool:
    return system.symmetry_defect <= HERMITIAN_DEFECT


def _finish(
    system: ReducedSystem,
    values: np.ndarray,
    vectors: np.ndarray,
    count: Optional[int],
    cluster_tol: float,
    method: str,
    converged: bool = True,
    shift: Optional[float] = None,
) -> SpectrumResult:
    values = np.asarray(values, dtype=complex)
    if shift is not None:
        keep = values.real > shift
        values, vectors = values[keep], vectors[:, keep]
    order = np.argsort(values.real, kind="stable")
    if count is not None:
        order = order[:count]
    values = values[order]
    vectors = _m_normalize(np.asarray(vectors)[:, order], system.M)
    residuals = np.array([residual(system, (values[i], vectors[:, i])) for i in range(values.size)])
    ids = cluster_eigenvalues(values, cluster_tol)
    mode = system.mode
    return SpectrumResult(
        eigenvalues=values,
        residuals=residuals,
        vectors=vectors,
        cluster_ids=ids,
        modes=[mode] * values.size,
        symmetry_defect=system.symmetry_defect,
        orthogonality_defect=orthogonality_defect(vectors, system.M, ids),
        converged=converged,
        method=method,
    )


def _dense_pairs(system: ReducedSystem) -> Tuple[np.ndarray, np.ndarray]:
    K = system.K.toarray()
    M = system.M.toarray()
    if _is_hermitian(system):
        values, vectors = linalg.eigh(K, M)
        return values.astype(complex), vectors
    return linalg.eig(K, M)


def dense_reference_eig(system: ReducedSystem, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> SpectrumResult:
    """Full dense generalized eigensolve, sorted by real part."""
    if system.dimension > DENSE_CAP:
        raise DimensionCapError(system.dimension, DENSE_CAP)
    values, vectors = _dense_pairs(system)
    return _finish(system, values, vectors, None, cluster_tol, "dense")


def _factorize(system: ReducedSystem, shift: float):
    shifted = (system.K - shift * system.M).tocsc()
    suggested = shift - 1e-3 * (1.0 + abs(shift))
    try:
        lu = sparse_linalg.splu(shifted)
    except RuntimeError as exc:
        logger.debug("factorization failed at shift %s: %s", shift, exc)
        raise ShiftCollisionError(shift, suggested) from None
    pivots = np.abs(lu.U.diagonal())
    if pivots.size and np.min(pivots) <= PIVOT_RTOL * np.max(pivots):
        raise ShiftCollisionError(shift, suggested)
    return lu, shifted.dtype


def lowest_eigenpairs(
    system: ReducedSystem,
    count: int,
    tol: float = 1e-8,
    shift: float = -1.0,
    seed: int = 0,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
) -> SpectrumResult:
    """`count` eigenpairs of K x = lambda M x nearest above `shift`."""
    if count < 1:
        raise ValueError("count must be at least 1")
    n = system.dimension
    count = min(count, n)

    if n <= DENSE_BELOW or count >= n - 2:
        values, vectors = _dense_pairs(system)
        result = _finish(system, values, vectors, count, cluster_tol, "dense", shift=shift)
        return _certify(result, tol, count, shift)

    lu, dtype = _factorize(system, shift)
    inverse = sparse_linalg.LinearOperator((n, n), matvec=lu.solve, dtype=dtype)
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n)
    if np.issubdtype(dtype, np.complexfloating):
        v0 = v0 + 1j * rng.standard_normal(n)
    # pairs at or below the shift are dropped after the solve
    requested = min(count + max(4, count // 2), n - 2)
    options = dict(k=requested, M=system.M, sigma=shift, OPinv=inverse, which="LM", v0=v0, tol=0, maxiter=50 * count)

    hermitian = _is_hermitian(system)
    method = "eigsh" if hermitian else "eigs"
    converged = True
    try:
        if hermitian:
            values, vectors = sparse_linalg.eigsh(system.K, **options)
        else:
            values, vectors = sparse_linalg.eigs(system.K, **options)
    except sparse_linalg.ArpackNoConvergence as exc:
        logger.warning("ARPACK stopped early: %d of %d pairs converged", exc.eigenvalues.size, requested)
        values, vectors, converged = exc.eigenvalues, exc.eigenvectors, False

    logger.info("%s solve: n=%d, count=%d, shift=%s, symmetry defect %.2e", method, n, count, shift, system.symmetry_defect)
    result = _finish(system, values, vectors, count, cluster_tol, method, converged, shift=shift)
    return _certify(result, tol, count, shift)


def _certify(result: SpectrumResult, tol: float, count: int, shift: float) -> SpectrumResult:
    """Mark pairs meeting the residual bound; short or uncertified results are flagged partial."""
    result.certified = result.residuals <= tol
    if len(result) < count:
        logger.warning("only %d of %d eigenpairs lie above shift %s", len(result), count, shift)
        result.converged = False
    failing = int(np.sum(~result.certified))
    if failing:
        logger.warning("%d eigenpairs exceed residual tolerance %.1e", failing, tol)
        result.converged = False
    return result
