"""Limit regimes as parameter sweeps.

Each sweep evaluates the pre-limit kernel at a sequence of parameters
approaching the limit and records the max-abs distance to the limit kernel on
a fixed window:

* hypergeometric -> discrete Bessel  (``xi -> 0``, ``z z' -> inf``, ``xi z z' = theta``);
* discrete Bessel -> discrete sine   (``theta -> inf`` near ``x = 2c sqrt(theta)``);
* discrete Bessel -> Airy            (``x = 2 sqrt(theta) + theta^{1/6} u``);
* hypergeometric -> gamma            (``xi -> 1``).

The tolerances the acceptance suite applies live in ``limits_thresholds.json``
and are empirical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import numpy as np

from . import kernels
from .measures import Complementary, ParamSet, Principal
from .operators import KernelMatrix, Window, build_bessel, build_hypergeometric, build_sine
from .partitions import LatticePoint


@lru_cache(maxsize=1)
def thresholds() -> dict:
    """Empirical tolerances shipped with the package."""
    return json.loads(resources.files(__package__).joinpath("limits_thresholds.json").read_text())


@dataclass(frozen=True)
class RegimePoint:
    """One point of a sweep: parameter value, induced parameters, window and distance."""

    regime: str
    param: float
    params: dict
    window: tuple
    distance: float
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.distance >= 0:
            raise ValueError("distance must be nonnegative")

    def to_json(self) -> dict:
        return {
            "regime": self.regime,
            "param": self.param,
            "params": self.params,
            "window": list(self.window),
            "distance": self.distance,
            "extra": self.extra,
        }


def verdict(points: list[RegimePoint], slack: float = 0.10) -> dict:
    """Machine-checkable summary of a sweep.

    ``violations`` counts consecutive increases; ``large_violations`` those
    exceeding ``slack`` (relative).  ``monotone_fraction`` is the share of
    consecutive pairs that do not increase.
    """
    d = [p.distance for p in points]
    pairs = list(zip(d, d[1:]))
    ups = [b > a for a, b in pairs]
    large = [b > a * (1.0 + slack) for a, b in pairs]
    return {
        "final_distance": d[-1],
        "monotone_fraction": 1.0 - sum(ups) / len(pairs) if pairs else 1.0,
        "violations": int(sum(ups)),
        "large_violations": int(sum(large)),
        "distances": d,
    }


def sweep_to_csv(points: list[RegimePoint]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["regime", "param", "distance"])
    for p in points:
        w.writerow([p.regime, repr(p.param), format(p.distance, ".17g")])
    return buf.getvalue()


# -- hypergeometric -> Bessel --------------------------------------------------


def regime_bessel(theta: float, s: float) -> Principal:
    """Principal series point ``a = 0, b = s, xi = theta / s^2``: ``z z' = s^2`` and ``xi z z' = theta``."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    if not s * s > theta:
        raise ValueError(f"need s^2 > theta for xi < 1 (s = {s}, theta = {theta})")
    return Principal(0.0, float(s), theta / (s * s))


def sweep_bessel(theta: float, s_values, window: Window, M: int | None = None) -> list[RegimePoint]:
    """Distance between the hypergeometric kernel at :func:`regime_bessel` and the Bessel kernel."""
    target = kernels.bessel_kernel_matrix(theta, window.twice)
    out = []
    for s in sorted(s_values):
        ps = regime_bessel(theta, s)
        K = kernels.hypergeometric_kernel(ps, window, M)
        dist = float(np.max(np.abs(K.values - target)))
        out.append(RegimePoint("bessel", float(s), ps.to_json(), tuple(int(t) for t in window.twice), dist, {"M": K.provenance["truncation_M"]}))
    return out


def coefficient_limit_bessel(theta: float, s: float, w: Window) -> float:
    """Max coefficient gap between the hypergeometric operator at :func:`regime_bessel` and the Bessel operator."""
    H = build_hypergeometric(regime_bessel(theta, s), w)
    B = build_bessel(theta, w)
    return float(max(np.max(np.abs(H.diag - B.diag)), np.max(np.abs(H.offdiag - B.offdiag))))


# -- Bessel -> sine -----------------------------------------------------------


def sine_shift(c: float, theta: float) -> LatticePoint:
    """Half-integer nearest ``2c sqrt(theta)``; ties go up (so ``c = 0`` gives ``+1/2``)."""
    target = 2.0 * c * math.sqrt(theta)
    return LatticePoint(2 * math.floor(target) + 1)


def sweep_sine(c: float, theta_values, half_width: int = 4) -> list[RegimePoint]:
    """Distance between the Bessel kernel near ``2c sqrt(theta)`` and the sine kernel.

    Sites are ``shift + xt`` for integers ``|xt| <= half_width``; the sine
    kernel is evaluated at the same integer offsets (it depends on
    ``xt - yt`` only).
    """
    xt = np.arange(-half_width, half_width + 1)
    target = kernels.sine_kernel_matrix(c, xt)
    out = []
    for theta in sorted(theta_values):
        shift = sine_shift(c, theta)
        twice = int(shift) + 2 * xt
        K = kernels.bessel_kernel_matrix(theta, twice)
        dist = float(np.max(np.abs(K - target)))
        out.append(RegimePoint("sine", float(theta), {"c": c, "theta": theta, "shift_x2": int(shift)}, tuple(int(t) for t in xt), dist))
    return out


def coefficient_limit_sine(c: float, theta: float, half_width: int = 4) -> float:
    """Max coefficient gap between ``theta^{-1/2}`` times the Bessel operator around ``2c sqrt(theta)`` and the sine operator."""
    shift = sine_shift(c, theta)
    w = Window(half_width, 0, "int")
    xs = shift.x + w.x
    d = -xs / math.sqrt(theta)
    e = np.ones(w.size - 1)
    S = build_sine(c, w)
    return float(max(np.max(np.abs(d - S.diag)), np.max(np.abs(e - S.offdiag))))


# -- Bessel -> Airy ------------------------------------------------------------


def airy_sites(theta: float, u_grid) -> tuple[np.ndarray, np.ndarray]:
    """Nearest lattice points to ``2 sqrt(theta) + theta^{1/6} u`` and the exactly representable ``u'``."""
    r = math.sqrt(theta)
    scale = theta ** (1.0 / 6.0)
    twice = np.array([2 * math.floor(2 * r + scale * u) + 1 for u in u_grid], dtype=np.int64)
    u_snap = (twice / 2.0 - 2 * r) / scale
    return twice, u_snap


def sweep_airy(theta_values, u_grid, prefactor: bool = True) -> list[RegimePoint]:
    """Distance between the (rescaled) Bessel kernel at the edge and the Airy kernel.

    With ``prefactor`` the Bessel kernel is multiplied by ``theta^{1/6}``
    (the Jacobian of ``x -> u``); without it the comparison is a negative
    control that should not converge.
    """
    out = []
    for theta in sorted(theta_values):
        twice, u_snap = airy_sites(theta, u_grid)
        B = kernels.bessel_kernel_matrix(theta, twice)
        if prefactor:
            B = theta ** (1.0 / 6.0) * B
        A = np.array([[kernels.airy_kernel(a, b) for b in u_snap] for a in u_snap])
        dist = float(np.max(np.abs(B - A)))
        out.append(
            RegimePoint(
                "airy" if prefactor else "airy_no_prefactor",
                float(theta),
                {"theta": theta, "prefactor": prefactor},
                tuple(float(u) for u in u_grid),
                dist,
                {"sites_x2": [int(t) for t in twice], "u_snapped": [float(u) for u in u_snap]},
            )
        )
    return out


# -- hypergeometric -> gamma ---------------------------------------------------


def gamma_truncation(xi: float, C: float | None = None, cap: int | None = None, half_width: int = 1) -> int:
    """``ceil(C / (1 - xi))`` capped, and at least ``4 * half_width``."""
    t = thresholds()["gamma"]
    C = t["truncation_constant"] if C is None else C
    cap = t["truncation_cap"] if cap is None else cap
    return max(4 * half_width, min(cap, math.ceil(C / (1.0 - xi) - 1e-9)))


def sweep_gamma(ps: ParamSet, xi_values, window: Window, reference: KernelMatrix | None = None, C: float | None = None) -> list[RegimePoint]:
    """Distance between hypergeometric kernels as ``xi -> 1`` and the gamma kernel.

    ``reference`` is the gamma kernel on ``window``; by default it is computed
    at the truncation cap.
    """
    if not isinstance(ps, (Principal, Complementary)):
        raise ValueError("the gamma limit needs the principal or complementary series")
    xi_values = list(xi_values)
    if any(b <= a for a, b in zip(xi_values, xi_values[1:])):
        raise ValueError("xi values must increase")
    if reference is None:
        reference = kernels.gamma_kernel(ps, window, thresholds()["gamma"]["truncation_cap"])
    out = []
    for xi in xi_values:
        M = gamma_truncation(xi, C, half_width=window.half_width)
        K = kernels.hypergeometric_kernel(ps.with_xi(xi), window, M)
        dist = float(np.max(np.abs(K.values - reference.values)))
        out.append(RegimePoint("gamma", float(xi), ps.with_xi(xi).to_json(), tuple(int(t) for t in window.twice), dist, {"M": M, "gamma_M": reference.provenance["truncation_M"]}))
    return out


def meets_thresholds(regime: str, v: dict) -> tuple[bool, str]:
    """Apply the manifest tolerances to a :func:`verdict`; returns ``(ok, reason)``."""
    t = thresholds()
    if regime == "bessel":
        b = t["bessel"]
        if v["violations"] > b["allowed_violations"] or v["large_violations"] > 0:
            return False, f"{v['violations']} increases ({v['large_violations']} above {b['violation_slack']:.0%})"
        if not v["final_distance"] < b["final_distance"]:
            return False, f"final distance {v['final_distance']:.3e} >= {b['final_distance']}"
        return True, "ok"
    if v["violations"]:
        return False, f"distances not decreasing: {v['distances']}"
    limit = {"sine": t["sine"]["final_distance"], "gamma": t["gamma"]["final_distance"]}.get(regime)
    if limit is not None and not v["final_distance"] < limit:
        return False, f"final distance {v['final_distance']:.3e} >= {limit}"
    return True, "ok"
