"""Discrete orthogonal polynomials (Meixner, Krawtchouk) and their ensembles.

Recurrence coefficients are computed by the discretized Stieltjes procedure
directly on the weight, with full re-orthogonalization, so nothing here
depends on closed-form coefficient tables.  Conventions follow the monic
three-term recurrence::

    p_{n+1}(x) = (x - alpha_n) p_n(x) - beta_n p_{n-1}(x),   beta_0 = sum_x W(x)

so that ``||p_n||_W^2 = beta_0 beta_1 ... beta_n``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .measures import krawtchouk_weight, meixner_weight

MAX_DEGREE = 200
MAX_ENUMERATED_SUBSETS = 10**6


@dataclass(frozen=True)
class OrthoSystem:
    """Orthogonal polynomial system of a discrete weight.

    Attributes
    ----------
    kind : str
        ``"meixner"`` or ``"krawtchouk"``.
    params : dict
        Parameters of the weight.
    weight : callable
        ``W(l)``; zero off the support.
    support : ndarray
        Points the weight is summed over (for Meixner, ``0..L_supp``).
    alpha, beta : ndarray
        Recurrence coefficients; ``beta[0]`` is the total mass.
    """

    kind: str
    params: dict
    weight: Callable[[float], float] = field(repr=False)
    support: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    beta: np.ndarray = field(repr=False)

    @property
    def max_degree(self) -> int:
        return len(self.alpha) - 1

    @property
    def mass(self) -> float:
        return float(self.beta[0])

    def log_norm_sq(self, n: int) -> float:
        """``log ||p_n||_W^2``."""
        return float(np.sum(np.log(self.beta[: n + 1])))

    def weights(self, xs) -> np.ndarray:
        return np.array([self.weight(x) for x in np.atleast_1d(xs)], dtype=float)


def stieltjes(points: np.ndarray, w: np.ndarray, max_degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Recurrence coefficients of the discrete measure ``sum_k w_k delta_{points_k}``.

    Works on the orthonormal vectors ``sqrt(w) p_n / ||p_n||`` and
    re-orthogonalizes each new vector against all previous ones (twice), so
    the procedure stays accurate to high degree.

    Returns
    -------
    alpha : ndarray, shape (max_degree + 1,)
    beta : ndarray, shape (max_degree + 1,)
        ``beta[0]`` is the total mass.
    """
    points = np.asarray(points, dtype=float)
    w = np.asarray(w, dtype=float)
    if max_degree + 1 > len(points):
        raise ValueError(f"degree {max_degree} needs at least {max_degree + 1} support points, have {len(points)}")
    mass = float(np.sum(w))
    Q = np.zeros((max_degree + 1, len(points)))
    q = np.sqrt(w) / math.sqrt(mass)
    alpha = np.zeros(max_degree + 1)
    beta = np.zeros(max_degree + 1)
    beta[0] = mass
    q_prev = np.zeros_like(q)
    b_prev = 0.0
    for n in range(max_degree + 1):
        Q[n] = q
        alpha[n] = float(np.dot(points * q, q))
        if n == max_degree:
            break
        r = (points - alpha[n]) * q - b_prev * q_prev
        for _ in range(2):
            r -= Q[: n + 1].T @ (Q[: n + 1] @ r)
        b = float(np.linalg.norm(r))
        if not b > 0:
            raise ArithmeticError(f"Stieltjes procedure broke down at degree {n + 1}")
        beta[n + 1] = b * b
        q_prev, q, b_prev = q, r / b, b
    return alpha, beta


def meixner_support_size(c: float, xi: float, rtol: float = 1e-16) -> int:
    """Smallest ``L`` such that the weight beyond ``L`` is below ``rtol`` of the total.

    Uses the geometric bound on ``(c)_l xi^l / l!``: for ``l > L`` consecutive
    terms have ratio at most ``xi max(1, (c + L)/(L + 1))``.
    """
    total = (1.0 - xi) ** (-c)
    L = 0
    while True:
        r = xi * max(1.0, (c + L + 1) / (L + 2))
        if r < 1 and meixner_weight(c, xi, L + 1) / (1 - r) < rtol * total:
            return L
        L += 1
        if L > 10**7:
            raise ArithmeticError("Meixner support truncation failed")


def build_meixner(c: float, xi: float, max_degree: int) -> OrthoSystem:
    """Meixner system on ``Z_+`` with weight ``(c)_l xi^l / l!``."""
    if not c > 0:
        raise ValueError("c must be positive")
    if not 0 < xi < 1:
        raise ValueError("xi must lie in (0, 1)")
    if not 0 <= max_degree <= MAX_DEGREE:
        raise ValueError(f"max_degree must lie in [0, {MAX_DEGREE}]")
    # high-degree polynomials grow fast enough to feel the far tail, so widen
    # the support until the coefficients stop moving
    L = max(meixner_support_size(c, xi), 2 * max_degree + 2)
    prev = None
    while True:
        support = np.arange(L + 1, dtype=float)
        w = np.array([meixner_weight(c, xi, l) for l in range(L + 1)])
        alpha, beta = stieltjes(support, w, max_degree)
        if prev is not None:
            scale = np.maximum(1.0, np.abs(np.concatenate([alpha, beta])))
            if np.max(np.abs(np.concatenate([alpha, beta]) - prev) / scale) < 1e-13:
                break
        if L > 10**5:
            raise ArithmeticError("Meixner recurrence coefficients did not settle")
        prev = np.concatenate([alpha, beta])
        L *= 2

    def weight(l, c=c, xi=xi):
        l = float(l)
        return meixner_weight(c, xi, int(l)) if l >= 0 and l.is_integer() else 0.0

    return OrthoSystem("meixner", {"c": c, "xi": xi}, weight, support, alpha, beta)


def build_krawtchouk(N_tilde: int, p: float, max_degree: int) -> OrthoSystem:
    """Krawtchouk system on ``{0, ..., N~}`` with the binomial weight."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if not 0 <= max_degree <= N_tilde:
        raise ValueError(f"max_degree {max_degree} exceeds N~ = {N_tilde}: the system is finite")
    support = np.arange(N_tilde + 1, dtype=float)
    w = np.array([krawtchouk_weight(N_tilde, p, l) for l in range(N_tilde + 1)])
    alpha, beta = stieltjes(support, w, max_degree)

    def weight(l, N_tilde=N_tilde, p=p):
        l = float(l)
        if not (l.is_integer() and 0 <= l <= N_tilde):
            return 0.0
        return krawtchouk_weight(N_tilde, p, int(l))

    return OrthoSystem("krawtchouk", {"N_tilde": N_tilde, "p": p}, weight, support, alpha, beta)


def orthonormal_polys(sys: OrthoSystem, n_max: int, xs) -> np.ndarray:
    """Values ``p_n(x)/||p_n||_W`` for ``n = 0..n_max``, shape ``(n_max + 1, len(xs))``."""
    if n_max > sys.max_degree:
        raise ValueError(f"degree {n_max} beyond the computed {sys.max_degree}")
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    out = np.zeros((n_max + 1, len(xs)))
    b = np.sqrt(sys.beta)
    out[0] = 1.0 / b[0]
    if n_max >= 1:
        out[1] = (xs - sys.alpha[0]) * out[0] / b[1]
    for n in range(1, n_max):
        out[n + 1] = ((xs - sys.alpha[n]) * out[n] - b[n] * out[n - 1]) / b[n + 1]
    return out


def orthonormal_functions(sys: OrthoSystem, n_max: int, xs) -> np.ndarray:
    """``sqrt(W(x)) p_n(x)/||p_n||_W`` for ``n = 0..n_max``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    return np.sqrt(sys.weights(xs)) * orthonormal_polys(sys, n_max, xs)


def cd_kernel(sys: OrthoSystem, N: int, x, y) -> float:
    """``sum_{i < N} ptilde_i(x) ptilde_i(y)``: the ``N``-point ensemble kernel."""
    if not 1 <= N <= sys.max_degree + 1:
        raise ValueError(f"N = {N} needs polynomials up to degree {N - 1}; system has {sys.max_degree}")
    f = orthonormal_functions(sys, N - 1, [x, y])
    return float(np.dot(f[:, 0], f[:, 1]))


def cd_kernel_matrix(sys: OrthoSystem, N: int, xs) -> np.ndarray:
    f = orthonormal_functions(sys, N - 1, xs)
    K = f.T @ f
    return 0.5 * (K + K.T)


def cd_kernel_integrable(sys: OrthoSystem, N: int, x, y) -> float:
    """Christoffel-Darboux two-term form, valid for ``x != y``.

    ``sqrt(beta_N) (ptilde_N(x) ptilde_{N-1}(y) - ptilde_{N-1}(x) ptilde_N(y)) / (x - y)``.
    """
    if x == y:
        raise ValueError("the two-term form is singular on the diagonal")
    if N > sys.max_degree:
        raise ValueError(f"the two-term form needs beta_{N}; system stops at degree {sys.max_degree}")
    f = orthonormal_functions(sys, N, [x, y])
    num = f[N, 0] * f[N - 1, 1] - f[N - 1, 0] * f[N, 1]
    return float(math.sqrt(sys.beta[N]) * num / (x - y))


def ensemble_log_prob(sys: OrthoSystem, N: int, X: Sequence[float]) -> float:
    """Unnormalized ``log( prod W(x_i) prod_{i<j} (x_i - x_j)^2 )``.

    Returns ``-inf`` for configurations of probability zero (repeated points,
    points off the support).
    """
    X = [float(x) for x in X]
    if len(X) != N:
        raise ValueError(f"configuration has {len(X)} points, expected {N}")
    if len(set(X)) < N:
        return -math.inf
    logp = 0.0
    for x in X:
        w = sys.weight(x)
        if w <= 0:
            return -math.inf
        logp += math.log(w)
    for a, b in itertools.combinations(X, 2):
        logp += 2.0 * math.log(abs(a - b))
    return logp


def ensemble_log_normalizer(sys: OrthoSystem, N: int) -> float | None:
    """``log`` of the sum of ``exp(ensemble_log_prob)`` over all ``N``-subsets of the support.

    Returns ``None`` when there are more than ``10**6`` subsets.
    """
    if math.comb(len(sys.support), N) > MAX_ENUMERATED_SUBSETS:
        return None
    logs = np.array([ensemble_log_prob(sys, N, X) for X in itertools.combinations(sys.support, N)])
    top = logs.max()
    return float(top + math.log(np.sum(np.exp(logs - top))))
