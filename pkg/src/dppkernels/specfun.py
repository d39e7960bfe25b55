r"""Integer-order Bessel J, the Airy function pair and log-gamma.

Bessel functions come from Miller's downward recurrence normalised by
:math:`J_0 + 2\sum_k J_{2k} = 1`, which is stable in every order/argument
regime the discrete Bessel kernel touches.

The Airy pair :math:`(\mathrm{Ai}, \mathrm{Ai}')` is evaluated by

* the Maclaurin series for :math:`|u| \le 1`;
* Taylor continuation of :math:`g'' = u g` for :math:`1 < |u| \le 8`, started
  from the series value at :math:`u = -1` on the left and from the asymptotic
  values at :math:`u = 8` on the right (both directions step the way in which
  Ai is not swamped by the growing solution);
* the exponential (:math:`u > 8`) and oscillatory (:math:`u < -8`) asymptotic
  expansions beyond.

A plain Maclaurin sum out to :math:`|u| = 8` would lose about seven digits
to cancellation, which is why the middle band is not done by series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

BESSEL_MAX_ORDER = 10**6
BESSEL_MAX_ARG = 1.0e4
AIRY_MAX_ARG = 30.0

_AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * math.gamma(2.0 / 3.0))
_AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * math.gamma(1.0 / 3.0))

_RESCALE_AT = 1.0e250
_RESCALE_BY = 1.0e-250


def _miller_start(m_max: int, t: float) -> int:
    start = m_max + max(40, math.ceil(1.3 * t)) + 20
    return start + (start % 2)


def bessel_j_orders(m_max: int, t: float) -> np.ndarray:
    """Return ``J_0(t), ..., J_{m_max}(t)`` from one downward recurrence.

    Parameters
    ----------
    m_max : int
        Highest order wanted (``0 <= m_max <= 10**6``).
    t : float
        Argument, ``0 <= t <= 10**4``.
    """
    m_max = int(m_max)
    if not 0 <= m_max <= BESSEL_MAX_ORDER:
        raise ValueError(f"order {m_max} outside [0, {BESSEL_MAX_ORDER}]")
    if not 0.0 <= t <= BESSEL_MAX_ARG:
        raise ValueError(f"argument {t} outside [0, {BESSEL_MAX_ARG}]")
    out = np.zeros(m_max + 1)
    if t == 0.0:
        out[0] = 1.0
        return out
    return _bessel_j_orders_cached(m_max, float(t)).copy()


@lru_cache(maxsize=64)
def _bessel_j_orders_cached(m_max: int, t: float) -> np.ndarray:
    start = _miller_start(m_max, t)
    out = np.zeros(m_max + 1)
    two_over_t = 2.0 / t
    j_next, j_cur = 0.0, 1.0e-300
    # Kahan-compensated accumulation of J_0 + 2 * sum J_{2k}
    norm, comp = 0.0, 0.0
    for k in range(start, 0, -1):
        if k <= m_max:
            out[k] = j_cur
        if k % 2 == 0:
            y = 2.0 * j_cur - comp
            s = norm + y
            comp = (s - norm) - y
            norm = s
        j_next, j_cur = j_cur, k * two_over_t * j_cur - j_next
        if abs(j_cur) > _RESCALE_AT:
            j_cur *= _RESCALE_BY
            j_next *= _RESCALE_BY
            norm *= _RESCALE_BY
            comp *= _RESCALE_BY
            if k <= m_max:
                out[k:] *= _RESCALE_BY
    out[0] = j_cur
    norm += j_cur - comp
    out /= norm
    out.flags.writeable = False
    return out


def bessel_j(m: int, t: float) -> float:
    """``J_m(t)`` for integer ``m``; negative orders use ``J_{-m} = (-1)^m J_m``."""
    m = int(m)
    if abs(m) > BESSEL_MAX_ORDER:
        raise ValueError(f"order {m} outside [-{BESSEL_MAX_ORDER}, {BESSEL_MAX_ORDER}]")
    val = bessel_j_orders(abs(m), t)[abs(m)]
    return -val if m < 0 and m % 2 else float(val)


def bessel_j_signed(orders: np.ndarray, t: float) -> np.ndarray:
    """Vectorised ``J_m(t)`` over an integer array of (possibly negative) orders."""
    orders = np.asarray(orders, dtype=np.int64)
    if orders.size == 0:
        return np.zeros(0)
    table = bessel_j_orders(int(np.abs(orders).max()), t)
    vals = table[np.abs(orders)]
    flip = (orders < 0) & (orders % 2 == 1)
    return np.where(flip, -vals, vals)


@dataclass(frozen=True)
class AiryPair:
    ai: float
    ai_prime: float


def _airy_maclaurin(u: float) -> tuple[float, float]:
    # Ai = Ai(0) f + Ai'(0) g with f = 1 + u^3/6 + ..., g = u + u^4/12 + ...
    u3 = u * u * u
    f, fp = 1.0, 0.0
    g, gp = u, 1.0
    tf, tg = 1.0, u
    k = 0
    while True:
        k += 1
        tf *= u3 / ((3 * k - 1) * (3 * k))
        tg *= u3 / ((3 * k) * (3 * k + 1))
        f += tf
        g += tg
        fp += 3 * k * tf / u if u != 0.0 else 0.0
        gp += (3 * k + 1) * tg / u if u != 0.0 else 0.0
        if abs(tf) < 1e-18 * abs(f) and abs(tg) < 1e-18 * max(abs(g), 1e-300):
            break
        if k > 200:
            break
    return _AI0 * f + _AIP0 * g, _AI0 * fp + _AIP0 * gp


def _taylor_step(u0: float, y: float, yp: float, h: float, terms: int = 40) -> tuple[float, float]:
    """Advance ``(y, y')`` of ``y'' = u y`` from ``u0`` to ``u0 + h`` by a Taylor polynomial."""
    # y(u0 + s) = sum a_m s^m with a_m m (m - 1) = u0 a_{m-2} + a_{m-3}
    a = [y, yp]
    val = y + yp * h
    der = yp
    h_pow = h
    for m in range(2, terms):
        a_m = (u0 * a[m - 2] + (a[m - 3] if m >= 3 else 0.0)) / (m * (m - 1))
        a.append(a_m)
        der += m * a_m * h_pow
        h_pow *= h
        val += a_m * h_pow
    return val, der


def _taylor_path(u_from: float, y: float, yp: float, u_to: float, max_step: float = 0.25) -> tuple[float, float]:
    nsteps = max(1, math.ceil(abs(u_to - u_from) / max_step))
    h = (u_to - u_from) / nsteps
    u = u_from
    for _ in range(nsteps):
        y, yp = _taylor_step(u, y, yp, h)
        u += h
    return y, yp


def _airy_asymptotic_pos(u: float) -> tuple[float, float]:
    zeta = 2.0 / 3.0 * u**1.5
    # u_k and v_k coefficients of the exponential expansions
    s_ai, s_aip = 0.0, 0.0
    uk, vk = 1.0, 1.0
    term_prev = math.inf
    k = 0
    while True:
        t_ai = (-1) ** k * uk / zeta**k
        t_aip = (-1) ** k * vk / zeta**k
        if abs(t_ai) > term_prev:
            break
        s_ai += t_ai
        s_aip += t_aip
        term_prev = abs(t_ai)
        if abs(t_ai) < 1e-17:
            break
        k += 1
        uk = uk * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        vk = -uk * (6 * k + 1) / (6 * k - 1)
        if k > 60:
            break
    pre = math.exp(-zeta) / (2.0 * math.sqrt(math.pi))
    return pre * u**-0.25 * s_ai, -pre * u**0.25 * s_aip


def _airy_asymptotic_neg(u: float) -> tuple[float, float]:
    x = -u
    zeta = 2.0 / 3.0 * x**1.5
    p_ai = q_ai = p_aip = q_aip = 0.0
    uk, vk = 1.0, 1.0
    k = 0
    last = math.inf
    while True:
        term_u = uk / zeta**k
        if abs(term_u) > last:
            break
        last = abs(term_u)
        sign = (-1) ** (k // 2)
        if k % 2 == 0:
            p_ai += sign * term_u
            p_aip += sign * vk / zeta**k
        else:
            q_ai += sign * term_u
            q_aip += sign * vk / zeta**k
        if term_u < 1e-17:
            break
        k += 1
        uk = uk * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216 * k)
        vk = -uk * (6 * k + 1) / (6 * k - 1)
        if k > 60:
            break
    phase = zeta + math.pi / 4
    pre = 1.0 / math.sqrt(math.pi)
    ai = pre * x**-0.25 * (math.sin(phase) * p_ai - math.cos(phase) * q_ai)
    aip = -pre * x**0.25 * (math.cos(phase) * p_aip + math.sin(phase) * q_aip)
    return ai, aip


_AIRY_SERIES_LIMIT = 1.0
_AIRY_ASYMPTOTIC_LIMIT = 8.0


@lru_cache(maxsize=1)
def _airy_anchor_right() -> tuple[float, float]:
    return _airy_asymptotic_pos(_AIRY_ASYMPTOTIC_LIMIT)


@lru_cache(maxsize=1)
def _airy_anchor_left() -> tuple[float, float]:
    return _airy_maclaurin(-_AIRY_SERIES_LIMIT)


def airy(u: float) -> AiryPair:
    """``Ai(u)`` and ``Ai'(u)`` for ``|u| <= 30`` (absolute error about ``1e-13``)."""
    u = float(u)
    if not abs(u) <= AIRY_MAX_ARG:
        raise ValueError(f"|u| = {abs(u)} exceeds {AIRY_MAX_ARG}")
    if abs(u) <= _AIRY_SERIES_LIMIT:
        return AiryPair(*_airy_maclaurin(u))
    if u > _AIRY_ASYMPTOTIC_LIMIT:
        return AiryPair(*_airy_asymptotic_pos(u))
    if u < -_AIRY_ASYMPTOTIC_LIMIT:
        return AiryPair(*_airy_asymptotic_neg(u))
    if u > 0:
        y, yp = _airy_anchor_right()
        return AiryPair(*_taylor_path(_AIRY_ASYMPTOTIC_LIMIT, y, yp, u))
    y, yp = _airy_anchor_left()
    return AiryPair(*_taylor_path(-_AIRY_SERIES_LIMIT, y, yp, u))


def log_gamma(x: float) -> float:
    """``ln Gamma(x)`` for ``x > 0``."""
    if not x > 0:
        raise ValueError(f"log_gamma needs x > 0, got {x}")
    return math.lgamma(x)
