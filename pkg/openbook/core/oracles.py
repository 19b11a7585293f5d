"""
Reference Spectra - closed-form eigenvalues with exact multiplicities for spheres,
hemispheres, rectangles and interval graphs.
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import OpenBookError

GROUP_RTOL = 1e-12


@dataclass(frozen=True)
class ReferenceSpectrum:
    values: Tuple[float, ...]
    multiplicities: Tuple[int, ...]
    provenance: str

    def __post_init__(self):
        if list(self.values) != sorted(self.values):
            raise OpenBookError("reference eigenvalues must be sorted")
        if any(m < 1 for m in self.multiplicities):
            raise OpenBookError("multiplicities must be >= 1")

    def __len__(self) -> int:
        return len(self.values)

    def expanded(self, count: Optional[int] = None) -> np.ndarray:
        """Eigenvalues repeated by multiplicity, optionally truncated."""
        flat = np.repeat(np.array(self.values, dtype=float), self.multiplicities)
        return flat if count is None else flat[:count]


def _grouped(values: Sequence[float], provenance: str, limit: Optional[float] = None) -> ReferenceSpectrum:
    grouped: List[List[float]] = []
    for value in sorted(values):
        if limit is not None and value >= limit:
            break
        if grouped and math.isclose(value, grouped[-1][0], rel_tol=GROUP_RTOL, abs_tol=GROUP_RTOL):
            grouped[-1][1] += 1
        else:
            grouped.append([value, 1])
    return ReferenceSpectrum(
        tuple(float(v) for v, _ in grouped),
        tuple(int(m) for _, m in grouped),
        provenance,
    )


def sphere_spectrum(l_max: int, radius: float = 1.0) -> ReferenceSpectrum:
    """l(l+1)/R^2 with multiplicity 2l+1."""
    values = tuple(l * (l + 1) / radius ** 2 for l in range(l_max + 1))
    return ReferenceSpectrum(values, tuple(2 * l + 1 for l in range(l_max + 1)), f"sphere of radius {radius}, spherical harmonics")


def parity_scan(l_max: int) -> Dict[str, Dict[int, int]]:
    """Count (l, m) pairs per l by the parity of l + |m|; odd vanishes on the equator."""
    counts: Dict[str, Dict[int, int]] = {"dirichlet": {}, "neumann": {}}
    for l in range(l_max + 1):
        for m in range(-l, l + 1):
            bc = "dirichlet" if (l + abs(m)) % 2 == 1 else "neumann"
            counts[bc][l] = counts[bc].get(l, 0) + 1
    return counts


def hemisphere_spectrum(bc: str, l_max: int, radius: float = 1.0) -> ReferenceSpectrum:
    bc = bc.lower()
    if bc not in ("dirichlet", "neumann"):
        raise OpenBookError(f"hemisphere boundary condition must be dirichlet or neumann, got '{bc}'")
    counts = parity_scan(l_max)[bc]
    levels = sorted(counts)
    return ReferenceSpectrum(
        tuple(l * (l + 1) / radius ** 2 for l in levels),
        tuple(counts[l] for l in levels),
        f"hemisphere of radius {radius}, {bc} equator, Legendre parity",
    )


def rectangle_spectrum(L: float, W: float, bc: str, max_index: int = 20) -> ReferenceSpectrum:
    """pi^2 (m^2/L^2 + n^2/W^2); complete below the first value a larger index could reach."""
    bc = bc.lower()
    if L <= 0 or W <= 0:
        raise OpenBookError("rectangle sides must be positive")
    start = 1 if bc == "dirichlet" else 0
    if bc not in ("dirichlet", "neumann"):
        raise OpenBookError(f"rectangle boundary condition must be dirichlet or neumann, got '{bc}'")
    values = [
        math.pi ** 2 * (m * m / L ** 2 + n * n / W ** 2)
        for m in range(start, max_index + 1)
        for n in range(start, max_index + 1)
    ]
    limit = math.pi ** 2 * (max_index + 1) ** 2 / max(L, W) ** 2
    return _grouped(values, f"{L} x {W} rectangle, {bc}", limit)


def interval_spectrum(
    lengths: Sequence[float],
    topology: str = "chain",
    bc: str = "dirichlet",
    max_index: int = 20,
) -> ReferenceSpectrum:
    """Kirchhoff chains behave as one interval of the total length; circles have double levels."""
    total = float(sum(lengths))
    if total <= 0:
        raise OpenBookError("interval lengths must sum to a positive value")
    topology = topology.lower()
    if topology == "circle":
        values = [0.0] + [(2.0 * math.pi * n / total) ** 2 for n in range(1, max_index + 1) for _ in range(2)]
        return _grouped(values, f"circle of length {total}")
    if topology != "chain":
        raise OpenBookError(f"topology must be chain or circle, got '{topology}'")
    start = 1 if bc.lower() == "dirichlet" else 0
    values = [(n * math.pi / total) ** 2 for n in range(start, max_index + 1)]
    return _grouped(values, f"interval of length {total}, {bc.lower()} ends")
