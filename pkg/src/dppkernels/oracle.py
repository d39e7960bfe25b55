"""Ground truth for correlation functions.

Exact values come from summing measure weights over every partition up to a
size cutoff; Monte Carlo values from an exact inverse-CDF sampler on the same
truncated support.  Nothing here touches the kernel code it is used to check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .measures import PlancherelParam, ParamSet, measure_from_json, total_mass, weight
from .partitions import LatticePoint, Partition, as_lattice_point, enumerate_partitions, semi_infinite_points

ORACLE_CAP = 20
MIN_CAPTURED_MASS = 1.0 - 1e-6
MIN_SAMPLES = 1000


class InsufficientMassError(ArithmeticError):
    """The enumerated partitions carry too little of the measure to sample from."""


def _points(points) -> tuple[LatticePoint, ...]:
    return tuple(p if isinstance(p, LatticePoint) else as_lattice_point(p) for p in points)


@dataclass(frozen=True)
class CorrelationQuery:
    """Points whose joint occupation probability is wanted, under ``measure``.

    Repeated points are allowed and give probability 0.
    """

    points: tuple[LatticePoint, ...]
    measure: ParamSet | PlancherelParam
    cutoff: int = 12

    def __post_init__(self):
        object.__setattr__(self, "points", _points(self.points))
        if not self.points:
            raise ValueError("at least one point is needed")

    @property
    def distinct(self) -> bool:
        return len(set(self.points)) == len(self.points)

    def to_json(self) -> dict:
        return {"points_x2": [int(p) for p in self.points], "measure": self.measure.to_json(), "cutoff": self.cutoff}


@dataclass(frozen=True)
class _Support:
    partitions: tuple[Partition, ...] = field(repr=False)
    weights: np.ndarray = field(repr=False)
    partial_mass: float
    tail_bound: float


@lru_cache(maxsize=16)
def _support(measure_key: tuple, cutoff: int) -> _Support:
    measure = measure_from_json(dict(measure_key))
    parts = tuple(enumerate_partitions(cutoff, cap=ORACLE_CAP))
    w = np.array([weight(measure, p) for p in parts])
    partial, tail = total_mass(measure, cutoff)
    w.flags.writeable = False
    return _Support(parts, w, partial, tail)


def enumerated_support(measure: ParamSet | PlancherelParam, cutoff: int) -> _Support:
    """All partitions with ``|p| <= cutoff`` and their weights (memoized)."""
    if not 0 <= cutoff <= ORACLE_CAP:
        raise ValueError(f"cutoff {cutoff} exceeds the enumeration cap {ORACLE_CAP}")
    return _support(tuple(sorted(measure.to_json().items())), cutoff)


def _occupancy(parts, lo: int, hi: int) -> np.ndarray:
    """Boolean matrix: partition ``k`` occupies doubled site ``lo + 2j``."""
    n_sites = (hi - lo) // 2 + 1
    occ = np.zeros((len(parts), n_sites), dtype=bool)
    for k, p in enumerate(parts):
        for x2 in semi_infinite_points(p, lo):
            if x2 <= hi:
                occ[k, (x2 - lo) // 2] = True
    return occ


def exact_correlation(q: CorrelationQuery) -> tuple[float, float]:
    """Correlation function by enumeration.

    Returns
    -------
    rho : float
        Sum of the weights of all ``|lambda| <= cutoff`` whose configuration
        contains every query point.
    tail_bound : float
        The true value lies in ``[rho, rho + tail_bound]``.
    """
    sup = enumerated_support(q.measure, q.cutoff)
    if not q.distinct:
        return 0.0, 0.0
    twice = [int(p) for p in q.points]
    lo, hi = min(twice), max(twice)
    occ = _occupancy(sup.partitions, lo, hi)
    mask = np.all(occ[:, [(t - lo) // 2 for t in twice]], axis=1)
    return math.fsum(sup.weights[mask]), sup.tail_bound


def correlation_table(measure, twice_sites, cutoff: int, max_order: int = 2) -> dict[tuple[int, ...], float]:
    """``rho`` for every subset of ``twice_sites`` of size ``1..max_order`` (shared occupancy pass)."""
    sup = enumerated_support(measure, cutoff)
    sites = sorted(int(s) for s in twice_sites)
    lo, hi = sites[0], sites[-1]
    occ = _occupancy(sup.partitions, lo, hi)
    out = {}
    for n in range(1, max_order + 1):
        for combo in itertools.combinations(sites, n):
            mask = np.all(occ[:, [(t - lo) // 2 for t in combo]], axis=1)
            out[combo] = math.fsum(sup.weights[mask])
    return out


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def spawn_seeds(seed: int, n: int) -> list[int]:
    """Independent child seeds for parallel workers; merge their samples in this order."""
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def sample_partitions(measure, seed: int, cutoff: int, n: int) -> list[Partition]:
    """``n`` independent draws from the measure restricted to ``|lambda| <= cutoff`` and renormalized.

    Raises
    ------
    InsufficientMassError
        If the enumerated partitions hold less than ``1 - 1e-6`` of the mass.
    """
    sup = enumerated_support(measure, cutoff)
    if sup.partial_mass < MIN_CAPTURED_MASS:
        raise InsufficientMassError(f"cutoff {cutoff} captures mass {sup.partial_mass:.9f} < {MIN_CAPTURED_MASS}")
    cdf = np.cumsum(sup.weights)
    cdf /= cdf[-1]
    u = _generator(seed).random(n)
    idx = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
    return [sup.partitions[i] for i in idx]


def sample_partition(measure, seed: int, cutoff: int) -> Partition:
    return sample_partitions(measure, seed, cutoff, 1)[0]


def empirical_correlation(samples, points, window) -> tuple[float, float]:
    """Fraction of samples whose configuration contains all ``points``, with its binomial standard error.

    ``window`` is ``(lo, hi)`` as half-integers; points outside it are refused.
    """
    samples = list(samples)
    if len(samples) < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {len(samples)}")
    lo, hi = _points(window)
    pts = _points(points)
    for p in pts:
        if not lo <= p <= hi:
            raise ValueError(f"{p!r} lies outside the window [{lo!r}, {hi!r}]")
    if len(set(pts)) < len(pts):
        return 0.0, 0.0
    wanted = {int(p) for p in pts}
    floor = min(wanted)
    hits = 0
    for p in samples:
        if wanted <= set(semi_infinite_points(p, floor)):
            hits += 1
    n = len(samples)
    est = hits / n
    return est, math.sqrt(est * (1.0 - est) / n)


def correlation_report(q: CorrelationQuery, kernel_values: np.ndarray | None, atol: float = 1e-5) -> dict:
    """Compare the exact correlation with ``det`` of the kernel block on the query points.

    ``status`` is ``PASS`` when ``|det - rho| <= atol + tail_bound`` with a
    tail bound below ``atol``; ``INCONCLUSIVE`` when the comparison passes
    only because the tail bound is large; ``FAIL`` otherwise.  Repeated
    points give ``rho = 0`` and ``SKIPPED`` (no determinant is compared).
    """
    rho, tail = exact_correlation(q)
    report = {"query": q.to_json(), "rho": rho, "tail_bound": tail}
    if not q.distinct:
        report.update(kernel_determinant=None, discrepancy=None, status="SKIPPED")
        return report
    det = float(np.linalg.det(np.asarray(kernel_values, dtype=float)))
    disc = abs(det - rho)
    if not disc <= atol + tail:
        status = "FAIL"
    elif tail > atol:
        status = "INCONCLUSIVE"
    else:
        status = "PASS"
    report.update(kernel_determinant=det, discrepancy=disc, status=status)
    return report


SAMPLE_CHUNK = 10_000


def sample_partitions_chunked(measure, seed: int, cutoff: int, n: int, workers: int = 1) -> list[Partition]:
    """Like :func:`sample_partitions` but split into fixed-size chunks with spawned seeds.

    The chunking depends only on ``n``, so the result is identical for any
    number of ``workers``; chunks are merged in order.
    """
    from concurrent.futures import ThreadPoolExecutor

    sizes = [SAMPLE_CHUNK] * (n // SAMPLE_CHUNK) + ([n % SAMPLE_CHUNK] if n % SAMPLE_CHUNK else [])
    seeds = spawn_seeds(seed, len(sizes))
    enumerated_support(measure, cutoff)  # build the shared table once
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        parts = list(pool.map(lambda a: sample_partitions(measure, a[0], cutoff, a[1]), zip(seeds, sizes)))
    return [p for chunk in parts for p in chunk]
