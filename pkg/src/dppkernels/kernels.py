"""Correlation kernels: discrete hypergeometric, gamma (spectral truncation),
discrete Bessel, discrete sine, Airy (closed forms) and the Meixner /
Krawtchouk Christoffel-Darboux kernels in lattice coordinates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.integrate

from . import operators as ops
from .measures import Complementary, Degenerate1, Degenerate2, ParamSet, Principal, krawtchouk_parameters
from .orthopoly import build_krawtchouk, build_meixner, cd_kernel, cd_kernel_matrix
from .partitions import LatticePoint, as_lattice_point
from .specfun import AIRY_MAX_ARG, airy, bessel_j_orders, bessel_j_signed

AIRY_KERNEL_MAX_ARG = 20.0
BESSEL_DIAG_CUTOFF = 1e-18
GAMMA_STABILITY_MS = (1024, 2048, 4096)
GAMMA_STABILITY_TOL = 1e-4
_CACHE_MAX_SITES = 2048

KINDS = ("hypergeometric", "bessel", "sine", "airy", "gamma", "meixner_cd", "krawtchouk_cd")
_LEGAL_STRATEGIES = {
    "hypergeometric": ("spectral_truncation",),
    "bessel": ("closed_form", "eigensum", "spectral_truncation"),
    "sine": ("closed_form",),
    "airy": ("closed_form",),
    "gamma": ("spectral_truncation",),
    "meixner_cd": ("eigensum", "closed_form"),
    "krawtchouk_cd": ("eigensum", "closed_form"),
}


def _lp(x) -> LatticePoint:
    return x if isinstance(x, LatticePoint) else as_lattice_point(x)


# -- spectral truncation ------------------------------------------------------


def _params_key(params: dict) -> str:
    return json.dumps(params, sort_keys=True)


@lru_cache(maxsize=8)
def _cached_decomposition(kind: str, key: str, M: int, offset: int) -> ops.EigenDecomposition:
    return ops.eigh_tridiagonal(_build(kind, json.loads(key), ops.Window(M, offset)))


def _build(kind: str, params: dict, w: ops.Window) -> ops.TridiagonalOperator:
    from .measures import measure_from_json

    if kind == "hypergeometric":
        return ops.build_hypergeometric(measure_from_json(params), w)
    if kind == "gamma":
        return ops.build_gamma(measure_from_json(dict(params, xi=0.5)), w)
    if kind == "bessel":
        return ops.build_bessel(params["theta"], w)
    raise ValueError(f"no truncated operator for {kind}")


def _decomposition(kind: str, params: dict, M: int, offset: int) -> ops.EigenDecomposition:
    if 2 * M <= _CACHE_MAX_SITES:
        return _cached_decomposition(kind, _params_key(params), M, offset)
    return ops.eigh_tridiagonal(_build(kind, params, ops.Window(M, offset)))


def _check_interior(w: ops.Window, M: int):
    if w.lattice != "half":
        raise ValueError("reporting window must lie on the half-integer lattice")
    if M < 4 * w.half_width:
        raise ValueError(f"truncation M = {M} is below 4 x window half-width {w.half_width}: entries would be truncation-polluted")


def default_truncation(ps: ParamSet, w: ops.Window) -> int:
    """Truncation half-width used when none is given: at least ``4h`` and
    ``16/(1 - xi)`` (the eigenvectors near 0 spread over ``~1/(1 - xi)`` sites)."""
    return max(4 * w.half_width, 32, math.ceil(16.0 / (1.0 - ps.xi) - 1e-9))


def _truncated_kernel(kind: str, params: dict, w: ops.Window, M: int, zero_gap=None) -> ops.KernelMatrix:
    _check_interior(w, M)
    E = _decomposition(kind, params, M, w.offset)
    K = ops.proj_plus(E, sites=w.twice, zero_gap=zero_gap)
    K.provenance["strategy"] = "spectral_truncation"
    return K


def hypergeometric_kernel(ps: ParamSet, w: ops.Window, M: int | None = None) -> ops.KernelMatrix:
    """Discrete hypergeometric kernel on the sites of ``w``.

    Computed as the positive spectral projection of the hypergeometric operator
    truncated to ``2M`` sites around ``w.offset``; only the block on ``w`` is
    returned, and ``M >= 4 * w.half_width`` is enforced.
    """
    if not isinstance(ps, (Principal, Complementary, Degenerate1)):
        raise ValueError(f"no hypergeometric kernel for the {ps.series} series")
    M = default_truncation(ps, w) if M is None else int(M)
    return _truncated_kernel("hypergeometric", ps.to_json(), w, M)


def gamma_kernel(ps: ParamSet, w: ops.Window, M: int = GAMMA_STABILITY_MS[0]) -> ops.KernelMatrix:
    """Gamma kernel on ``w`` from the truncated gamma operator.

    The gamma operator has continuous spectrum through 0, so the result is
    flagged ``gapless`` and only trustworthy together with
    :func:`gamma_stability` (``xi`` in ``ps`` is ignored).
    """
    if not isinstance(ps, (Principal, Complementary)):
        raise ValueError(f"no gamma kernel for the {ps.series} series")
    params = {k: v for k, v in ps.to_json().items() if k != "xi"}
    return _truncated_kernel("gamma", params, w, int(M))


@dataclass(frozen=True)
class StabilityReport:
    """Gamma-kernel values at several truncations and their spread."""

    Ms: tuple[int, ...]
    kernels: tuple[ops.KernelMatrix, ...] = field(repr=False)
    consecutive_diffs: tuple[float, ...]
    tol: float

    @property
    def max_diff(self) -> float:
        return max(self.consecutive_diffs)

    @property
    def stable(self) -> bool:
        return self.max_diff <= self.tol

    def to_json(self) -> dict:
        return {
            "Ms": list(self.Ms),
            "consecutive_max_abs_diff": list(self.consecutive_diffs),
            "tol": self.tol,
            "stable": self.stable,
        }


def gamma_stability(ps: ParamSet, w: ops.Window, Ms=GAMMA_STABILITY_MS, tol: float = GAMMA_STABILITY_TOL) -> StabilityReport:
    """Compute the gamma kernel at each truncation in ``Ms`` and compare consecutive ones."""
    Ms = tuple(int(m) for m in Ms)
    if len(Ms) < 2:
        raise ValueError("need at least two truncations")
    kernels = tuple(gamma_kernel(ps, w, M) for M in Ms)
    diffs = tuple(float(np.max(np.abs(a.values - b.values))) for a, b in zip(kernels, kernels[1:]))
    for K in kernels:
        K.provenance["stability"] = {"Ms": list(Ms), "max_diff": max(diffs), "flagged": max(diffs) > tol}
    return StabilityReport(Ms, kernels, diffs, tol)


# -- discrete Bessel ----------------------------------------------------------


def _bessel_tail_sq(m0: int, t: float) -> float:
    """``sum_{m >= m0} J_m(t)^2`` for ``m0 >= 0``, stopping once terms drop below the cutoff past the turning point."""
    hi = max(m0, math.ceil(t)) + 32
    while True:
        J = bessel_j_orders(hi, t)
        terms = J[m0:] ** 2
        beyond = np.arange(m0, hi + 1) > t
        small = np.flatnonzero(beyond & (terms < BESSEL_DIAG_CUTOFF))
        if len(small):
            return math.fsum(terms[: small[0] + 1])
        hi *= 2


def bessel_diagonal(theta: float, x) -> float:
    """``K(x, x) = sum_{a in Z'_+} J_{x+a}(2 sqrt(theta))^2``.

    When ``x + 1/2 < 0`` the complementary sum ``1 - sum_{m > -(x + 1/2)} J_m^2``
    (same eigensum, by ``sum_m J_m^2 = 1``) keeps values near 1 accurate.
    """
    x = _lp(x)
    t = 2.0 * math.sqrt(theta)
    m0 = (x.twice_x + 1) // 2
    if m0 >= 0:
        return _bessel_tail_sq(m0, t)
    return 1.0 - _bessel_tail_sq(1 - m0, t)


def bessel_kernel(theta: float, x, y) -> float:
    """Discrete Bessel kernel ``K_theta(x, y)`` on the half-integer lattice.

    Off the diagonal the two-term form
    ``sqrt(theta) (J_{x-1/2} J_{y+1/2} - J_{x+1/2} J_{y-1/2}) / (x - y)``
    at argument ``2 sqrt(theta)``; on it, :func:`bessel_diagonal`.
    """
    if not theta > 0:
        raise ValueError("theta must be positive")
    x, y = _lp(x), _lp(y)
    if x == y:
        return bessel_diagonal(theta, x)
    t = 2.0 * math.sqrt(theta)
    mx, my = (x.twice_x - 1) // 2, (y.twice_x - 1) // 2
    jx = bessel_j_signed(np.array([mx, mx + 1, my, my + 1]), t)
    num = jx[0] * jx[3] - jx[1] * jx[2]
    return float(math.sqrt(theta) * num / (x.x - y.x))


def bessel_kernel_matrix(theta: float, twice_sites) -> np.ndarray:
    """Vectorised :func:`bessel_kernel` over doubled coordinates."""
    s = np.asarray(twice_sites, dtype=np.int64)
    t = 2.0 * math.sqrt(theta)
    m = (s - 1) // 2
    lo = bessel_j_signed(m, t)
    hi = bessel_j_signed(m + 1, t)
    dx = (s[:, None] - s[None, :]) / 2.0
    num = np.outer(lo, hi) - np.outer(hi, lo)
    with np.errstate(divide="ignore", invalid="ignore"):
        K = math.sqrt(theta) * num / dx
    for i, x2 in enumerate(s):
        K[i, i] = bessel_diagonal(theta, LatticePoint(int(x2)))
    return 0.5 * (K + K.T)


def bessel_kernel_eigensum(theta: float, x, y, a_max: int | None = None) -> float:
    """``sum_{a in Z'_+, a <= a_max} J_{x+a} J_{y+a}`` (direct eigenfunction expansion)."""
    x, y = _lp(x), _lp(y)
    t = 2.0 * math.sqrt(theta)
    if a_max is None:
        a_max = abs(x.x) + abs(y.x) + t + 60
    a = np.arange(0.5, a_max + 1, 1.0)
    mx = (x.x + a).astype(np.int64)
    my = (y.x + a).astype(np.int64)
    return math.fsum(bessel_j_signed(mx, t) * bessel_j_signed(my, t))


# -- discrete sine -------------------------------------------------------------


def sine_kernel(c: float, xt: int, yt: int) -> float:
    """``sin(arccos(c) (x - y)) / (pi (x - y))``, with diagonal ``arccos(c)/pi``."""
    if not -1 < c < 1:
        raise ValueError("c must lie in (-1, 1)")
    d = int(xt) - int(yt)
    phi = math.acos(c)
    if d == 0:
        return phi / math.pi
    return math.sin(phi * d) / (math.pi * d)


def sine_kernel_matrix(c: float, sites) -> np.ndarray:
    s = np.asarray(sites, dtype=np.int64)
    return np.array([[sine_kernel(c, a, b) for b in s] for a in s])


def sine_kernel_fourier(c: float, d: int, panels: int = 64, order: int = 20) -> float:
    """Oracle for the sine kernel at separation ``d``: Fourier projection by quadrature.

    Integrates ``(1/2pi) e^{i phi d}`` over ``{phi : 2(cos phi - c) > 0}``,
    whose endpoint is located by bisection rather than ``arccos``, with
    composite Gauss-Legendre.
    """
    lo, hi = 0.0, math.pi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if math.cos(mid) - c > 0:
            lo = mid
        else:
            hi = mid
    edge = 0.5 * (lo + hi)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    h = edge / panels
    for k in range(panels):
        a = k * h
        phi = a + 0.5 * h * (nodes + 1.0)
        total += 0.5 * h * float(np.dot(weights, np.cos(phi * d)))
    # the integrand is even in phi; the imaginary part cancels
    return total / math.pi


# -- Airy ----------------------------------------------------------------------


def _check_airy_args(*us):
    for u in us:
        if not abs(u) <= AIRY_KERNEL_MAX_ARG:
            raise ValueError(f"|u| = {abs(u)} exceeds {AIRY_KERNEL_MAX_ARG}")


def _ai_clipped(w: float) -> float:
    # Ai(30) ~ 1e-48: beyond the evaluator's range the integrand is zero in double precision
    return airy(w).ai if w <= AIRY_MAX_ARG else 0.0


def airy_kernel_integral(u: float, v: float) -> float:
    """``int_0^inf Ai(u + s) Ai(v + s) ds`` by adaptive quadrature.

    The range is cut where ``min(u, v) + s`` reaches 14, past which the
    product is below ``Ai(14)^2 ~ 1e-28``; oscillatory stretches are split
    into unit panels.
    """
    _check_airy_args(u, v)
    s_max = max(14.0 - min(u, v), 1.0)
    edges = np.linspace(0.0, s_max, max(2, math.ceil(s_max)) + 1)
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        val, _ = scipy.integrate.quad(lambda s: _ai_clipped(u + s) * _ai_clipped(v + s), a, b, epsabs=1e-15, epsrel=1e-12, limit=100)
        total += val
    return total


def airy_kernel_diagonal_limit(u: float) -> float:
    """``Ai'(u)^2 - u Ai(u)^2``: the ``v -> u`` limit of the two-term form."""
    p = airy(u)
    return p.ai_prime**2 - u * p.ai**2


def airy_kernel(u: float, v: float, near: float = 1e-2) -> float:
    """Airy kernel ``(Ai(u) Ai'(v) - Ai'(u) Ai(v)) / (u - v)``.

    For ``|u - v| < near`` the two-term form cancels badly and the integral
    form is used instead.
    """
    _check_airy_args(u, v)
    if abs(u - v) < near:
        return airy_kernel_integral(u, v)
    a, b = airy(u), airy(v)
    return (a.ai * b.ai_prime - a.ai_prime * b.ai) / (u - v)


# -- Christoffel-Darboux kernels in lattice coordinates ------------------------


def _shifted_index(x: LatticePoint, N: int) -> int | None:
    # l = x + N - 1/2 ; doubled: (2x + 2N - 1) / 2
    l2 = x.twice_x + 2 * N - 1
    return l2 // 2 if l2 >= 0 else None


@lru_cache(maxsize=16)
def _meixner_system(c: float, xi: float, N: int):
    return build_meixner(c, xi, N)


@lru_cache(maxsize=16)
def _krawtchouk_system(N_tilde: int, p: float, N: int):
    return build_krawtchouk(N_tilde, p, min(N, N_tilde))


def meixner_kernel_on_lattice(N: int, c: float, xi: float, x, y) -> float:
    """Meixner ensemble kernel with ``N`` particles at ``l = x + N - 1/2``; 0 below the support."""
    x, y = _lp(x), _lp(y)
    lx, ly = _shifted_index(x, N), _shifted_index(y, N)
    if lx is None or ly is None:
        return 0.0
    return cd_kernel(_meixner_system(c, xi, N), N, lx, ly)


def meixner_kernel_matrix(N: int, c: float, xi: float, twice_sites) -> np.ndarray:
    s = np.asarray(twice_sites, dtype=np.int64)
    l2 = s + 2 * N - 1
    ok = l2 >= 0
    K = np.zeros((len(s), len(s)))
    if ok.any():
        idx = np.flatnonzero(ok)
        K[np.ix_(idx, idx)] = cd_kernel_matrix(_meixner_system(c, xi, N), N, l2[ok] // 2)
    return K


def krawtchouk_kernel_on_lattice(ps: Degenerate2, x, y) -> float:
    """Krawtchouk ensemble kernel for the second degenerate series, at ``l = x + N - 1/2``."""
    N_tilde, p = krawtchouk_parameters(ps)
    x, y = _lp(x), _lp(y)
    lx, ly = _shifted_index(x, ps.N), _shifted_index(y, ps.N)
    if lx is None or ly is None or lx > N_tilde or ly > N_tilde:
        return 0.0
    return cd_kernel(_krawtchouk_system(N_tilde, p, ps.N), ps.N, lx, ly)


# -- unified handle ------------------------------------------------------------


@dataclass(frozen=True)
class KernelHandle:
    """A kernel kind, its parameters and the evaluation strategy.

    ``params`` holds: for ``hypergeometric`` / ``gamma`` a serialized
    parameter set (``measure_from_json`` format) and optionally ``M``; for
    ``bessel`` ``theta``; for ``sine`` ``c``; for ``meixner_cd`` ``N, c, xi``;
    for ``krawtchouk_cd`` a serialized second-degenerate parameter set.
    """

    kind: str
    params: dict
    strategy: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        strategy = self.strategy or _LEGAL_STRATEGIES[self.kind][0]
        if strategy not in _LEGAL_STRATEGIES[self.kind]:
            raise ValueError(f"strategy {strategy!r} is not legal for {self.kind}")
        object.__setattr__(self, "strategy", strategy)

    def _paramset(self) -> ParamSet:
        from .measures import measure_from_json

        data = {k: v for k, v in self.params.items() if k != "M"}
        if self.kind == "gamma":
            data.setdefault("xi", 0.5)
        return measure_from_json(data)

    def matrix(self, points) -> np.ndarray:
        """Kernel matrix on a list of points (half-integers, integers for ``sine``, reals for ``airy``)."""
        pts = list(points)
        if self.kind == "sine":
            return sine_kernel_matrix(self.params["c"], pts)
        if self.kind == "airy":
            return np.array([[airy_kernel(u, v) for v in pts] for u in pts])
        twice = np.array([_lp(p).twice_x for p in pts], dtype=np.int64)
        if self.kind == "bessel" and self.strategy != "spectral_truncation":
            if self.strategy == "eigensum":
                return np.array([[bessel_kernel_eigensum(self.params["theta"], LatticePoint(int(a)), LatticePoint(int(b))) for b in twice] for a in twice])
            return bessel_kernel_matrix(self.params["theta"], twice)
        if self.kind == "meixner_cd":
            p = self.params
            return meixner_kernel_matrix(p["N"], p["c"], p["xi"], twice)
        if self.kind == "krawtchouk_cd":
            ps = self._paramset()
            return np.array([[krawtchouk_kernel_on_lattice(ps, LatticePoint(int(a)), LatticePoint(int(b))) for b in twice] for a in twice])
        # truncation kinds: smallest centered window holding every point
        h = int(np.max(np.abs(twice)) + 1) // 2
        w = ops.Window(max(h, 1))
        if self.kind == "bessel":
            M = int(self.params.get("M", max(4 * w.half_width, 40)))
            K = _truncated_kernel("bessel", {"theta": self.params["theta"]}, w, M)
        elif self.kind == "gamma":
            K = gamma_kernel(self._paramset(), w, int(self.params.get("M", GAMMA_STABILITY_MS[0])))
        else:
            K = hypergeometric_kernel(self._paramset(), w, self.params.get("M"))
        idx = [K.index(t) for t in twice]
        return K.values[np.ix_(idx, idx)]

    def evaluate(self, x, y) -> float:
        return float(self.matrix([x, y])[0, 1]) if x != y else float(self.matrix([x])[0, 0])
