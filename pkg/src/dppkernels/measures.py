"""z-measures on Young diagrams, their Plancherel degenerations and the
Meixner / Krawtchouk weights of the degenerate series.

Every z-measure is parametrised by a :class:`ParamSet` subclass, one per
positivity series.  Whatever the series, ``z z'``, ``z + z'`` and
``(z + k)(z' + k)`` are real, and weights are evaluated from those real
quantities in log space with explicit sign tracking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import ClassVar

from .partitions import (
    Partition,
    conjugate,
    dimension,
    enumerate_partitions,
    pochhammer_lambda,
)

_EPS = 2.0**-52


class ParamSet:
    """Validated ``(z, z', xi)`` triple tagged with its series."""

    series: ClassVar[str]
    xi: float

    @property
    def z(self) -> complex | float:
        raise NotImplementedError

    @property
    def z_prime(self) -> complex | float:
        raise NotImplementedError

    @property
    def zz(self) -> float:
        """The real product ``z z'``."""
        return float(self.z * self.z_prime)

    @property
    def z_plus_zp(self) -> float:
        return float(self.z + self.z_prime)

    def product_at(self, k: float) -> float:
        """``(z + k)(z' + k)``, real in every series."""
        return float((self.z + k) * (self.z_prime + k))

    def reflected(self) -> "ParamSet":
        """The parameter set ``(-z, -z')`` in the same series, when representable."""
        raise ValueError(f"the reflection (-z, -z') of a {self.series} parameter set is not representable")

    def with_xi(self, xi: float) -> "ParamSet":
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def from_json(data: dict) -> "ParamSet":
        kind = data.get("series")
        try:
            cls = _SERIES[kind]
        except KeyError:
            raise ValueError(f"unknown series {kind!r}; expected one of {sorted(_SERIES)}") from None
        fields = {k: v for k, v in data.items() if k != "series"}
        return cls(**fields)


@dataclass(frozen=True)
class Principal(ParamSet):
    """``z = a + ib``, ``z' = a - ib`` with ``b != 0`` and ``0 < xi < 1``."""

    a: float
    b: float
    xi: float
    series: ClassVar[str] = "principal"

    def __post_init__(self):
        if self.b == 0:
            raise ValueError("principal series needs b != 0 (z must be nonreal)")
        if not 0 < self.xi < 1:
            raise ValueError(f"principal series needs 0 < xi < 1, got {self.xi}")

    @property
    def z(self) -> complex:
        return complex(self.a, self.b)

    @property
    def z_prime(self) -> complex:
        return complex(self.a, -self.b)

    @property
    def zz(self) -> float:
        return self.a * self.a + self.b * self.b

    @property
    def z_plus_zp(self) -> float:
        return 2.0 * self.a

    def product_at(self, k: float) -> float:
        return (self.a + k) ** 2 + self.b * self.b

    def reflected(self) -> "Principal":
        return Principal(-self.a, self.b, self.xi)

    def with_xi(self, xi: float) -> "Principal":
        return Principal(self.a, self.b, xi)

    def to_json(self) -> dict:
        return {"series": self.series, "a": self.a, "b": self.b, "xi": self.xi}


@dataclass(frozen=True)
class Complementary(ParamSet):
    """Real ``z, z'`` in one open interval ``(m, m + 1)`` and ``0 < xi < 1``."""

    z_value: float
    zp_value: float
    xi: float
    series: ClassVar[str] = "complementary"

    def __init__(self, z: float, z_prime: float, xi: float):
        object.__setattr__(self, "z_value", float(z))
        object.__setattr__(self, "zp_value", float(z_prime))
        object.__setattr__(self, "xi", float(xi))
        if float(z).is_integer() or float(z_prime).is_integer():
            raise ValueError("complementary series needs non-integer z and z'")
        if math.floor(z) != math.floor(z_prime):
            raise ValueError(f"z = {z} and z' = {z_prime} are not in a common interval (m, m+1)")
        if not 0 < xi < 1:
            raise ValueError(f"complementary series needs 0 < xi < 1, got {xi}")

    @property
    def z(self) -> float:
        return self.z_value

    @property
    def z_prime(self) -> float:
        return self.zp_value

    def reflected(self) -> "Complementary":
        return Complementary(-self.z_value, -self.zp_value, self.xi)

    def with_xi(self, xi: float) -> "Complementary":
        return Complementary(self.z_value, self.zp_value, xi)

    def to_json(self) -> dict:
        return {"series": self.series, "z": self.z_value, "z_prime": self.zp_value, "xi": self.xi}


@dataclass(frozen=True)
class Degenerate1(ParamSet):
    """``z = N``, ``z' = N + c - 1`` with ``c > 0`` and ``0 < xi < 1``."""

    N: int
    c: float
    xi: float
    series: ClassVar[str] = "degenerate1"

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if self.c <= 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not 0 < self.xi < 1:
            raise ValueError(f"first degenerate series needs 0 < xi < 1, got {self.xi}")

    @property
    def z(self) -> float:
        return float(self.N)

    @property
    def z_prime(self) -> float:
        return self.N + self.c - 1.0

    def with_xi(self, xi: float) -> "Degenerate1":
        return Degenerate1(self.N, self.c, xi)

    def to_json(self) -> dict:
        return {"series": self.series, "N": self.N, "c": self.c, "xi": self.xi}


@dataclass(frozen=True)
class Degenerate2(ParamSet):
    """``z = N``, ``z' = -N'`` with positive integers ``N, N'`` and ``xi < 0``."""

    N: int
    N_prime: int
    xi: float
    series: ClassVar[str] = "degenerate2"

    def __post_init__(self):
        for name in ("N", "N_prime"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")
        if not self.xi < 0:
            raise ValueError(f"second degenerate series needs xi < 0, got {self.xi}")

    @property
    def z(self) -> float:
        return float(self.N)

    @property
    def z_prime(self) -> float:
        return -float(self.N_prime)

    def reflected(self) -> "Degenerate2":
        # (-N, N') is (N', -N) after the z <-> z' symmetry
        return Degenerate2(self.N_prime, self.N, self.xi)

    def with_xi(self, xi: float) -> "Degenerate2":
        return Degenerate2(self.N, self.N_prime, xi)

    def to_json(self) -> dict:
        return {"series": self.series, "N": self.N, "N_prime": self.N_prime, "xi": self.xi}


_SERIES = {cls.series: cls for cls in (Principal, Complementary, Degenerate1, Degenerate2)}


@dataclass(frozen=True)
class PlancherelParam:
    """Poissonized Plancherel measure with parameter ``theta > 0``."""

    theta: float
    series: ClassVar[str] = "plancherel"

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"theta must be positive, got {self.theta}")

    def to_json(self) -> dict:
        return {"series": self.series, "theta": self.theta}


def measure_from_json(data: dict) -> ParamSet | PlancherelParam:
    if data.get("series") == PlancherelParam.series:
        return PlancherelParam(float(data["theta"]))
    return ParamSet.from_json(data)


def _log_dim_factor(p: Partition) -> float:
    """``2 log(dim p / |p|!)``."""
    n = p.size()
    return 2.0 * (math.log(dimension(p)) - math.lgamma(n + 1))


def z_weight(ps: ParamSet, p: Partition) -> float:
    """Weight of ``p`` under the z-measure ``M_{z, z', xi}``.

    Evaluated as ``(1 - xi)^{zz'} xi^n prod_boxes (z + c)(z' + c) (dim/n!)^2``
    in log space.  The sign of ``xi^n`` times the box product is tracked and
    must come out nonnegative; a negative result means the parameters lie
    outside every positivity series and raises ``ArithmeticError``.
    """
    n = p.size()
    log_w = ps.zz * math.log1p(-ps.xi) + _log_dim_factor(p)
    negative = False
    if n:
        log_w += n * math.log(abs(ps.xi))
        negative = ps.xi < 0 and n % 2 == 1
    for c in p.contents():
        f = ps.product_at(c)
        if f == 0.0:
            return 0.0
        log_w += math.log(abs(f))
        if f < 0:
            negative = not negative
    if negative:
        raise ArithmeticError(f"negative z-measure weight for {p} under {ps}")
    return math.exp(log_w)


def z_weight_direct(z: complex, z_prime: complex, xi: float, p: Partition) -> float:
    """Straight evaluation of the weight formula with complex Pochhammer symbols.

    No log space, no sign bookkeeping; used to cross-check :func:`z_weight`
    and for symmetry identities where ``z`` and ``z'`` are swapped or negated.
    """
    n = p.size()
    dim_factor = (dimension(p) / math.factorial(n)) ** 2
    w = (1 - xi) ** (z * z_prime) * xi**n * pochhammer_lambda(z, p) * pochhammer_lambda(z_prime, p) * dim_factor
    return complex(w).real


def size_pmf(ps: ParamSet, n: int) -> float:
    """Probability that ``|lambda| = n``: ``(1 - xi)^{zz'} (zz')_n xi^n / n!``.

    This negative-binomial marginal is what the box-by-box weights sum to at
    fixed size; the identity is checked against enumeration in the test suite.
    """
    if n < 0:
        return 0.0
    t = ps.zz
    val = math.exp(t * math.log1p(-ps.xi))
    for k in range(n):
        val *= ps.xi * (t + k) / (k + 1)
    return val


def size_tail_bound(ps: ParamSet, L: int) -> float:
    """Upper bound on ``P(|lambda| > L)``.

    For ``0 < xi < 1`` consecutive marginal terms have ratio
    ``xi (zz' + n)/(n + 1)``, bounded for ``n > L`` by
    ``r = xi max(1, (zz' + L + 1)/(L + 2))``; the tail is then at most
    ``P(|lambda| = L + 1)/(1 - r)``.  Returns ``inf`` when ``r >= 1``.
    The second degenerate series has finite support and its tail is summed
    exactly.
    """
    if isinstance(ps, Degenerate2):
        K = ps.N * ps.N_prime
        return math.fsum(size_pmf(ps, n) for n in range(L + 1, K + 1))
    t = ps.zz
    r = ps.xi * max(1.0, (t + L + 1) / (L + 2))
    if r >= 1:
        return math.inf
    return size_pmf(ps, L + 1) / (1 - r)


def z_total_mass(ps: ParamSet, cutoff: int) -> tuple[float, float]:
    """Sum the z-weights over ``|lambda| <= cutoff``.

    Returns
    -------
    partial_sum : float
        Compensated sum of all weights with ``|lambda| <= cutoff``.
    tail_bound : float
        Upper bound on ``1 - partial_sum`` (including a rounding allowance);
        exactly zero for the second degenerate series once ``cutoff >= N N'``.
    """
    weights = [z_weight(ps, p) for p in enumerate_partitions(cutoff)]
    partial = math.fsum(weights)
    tail = size_tail_bound(ps, cutoff)
    if isinstance(ps, Degenerate2) and cutoff >= ps.N * ps.N_prime:
        return partial, 0.0
    return partial, tail + len(weights) * 4 * _EPS


def plancherel_poisson_weight(theta: float, p: Partition) -> float:
    """``e^{-theta} theta^{|p|} (dim p / |p|!)^2``."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    n = p.size()
    return math.exp(-theta + n * math.log(theta) + _log_dim_factor(p))


def plancherel_fixed_n_weight(n: int, p: Partition) -> Fraction:
    """``(dim p)^2 / n!`` as an exact fraction."""
    if p.size() != n:
        raise ValueError(f"partition {p.parts} has size {p.size()}, expected {n}")
    return Fraction(dimension(p) ** 2, math.factorial(n))


def plancherel_size_pmf(theta: float, n: int) -> float:
    return math.exp(-theta + n * math.log(theta) - math.lgamma(n + 1)) if n >= 0 else 0.0


def plancherel_tail_bound(theta: float, L: int) -> float:
    """Poisson tail ``P(|lambda| > L)`` bounded geometrically by ratio ``theta/(L + 2)``."""
    r = theta / (L + 2)
    if r >= 1:
        return math.inf
    return plancherel_size_pmf(theta, L + 1) / (1 - r)


def plancherel_total_mass(theta: float, cutoff: int) -> tuple[float, float]:
    weights = [plancherel_poisson_weight(theta, p) for p in enumerate_partitions(cutoff)]
    return math.fsum(weights), plancherel_tail_bound(theta, cutoff) + len(weights) * 4 * _EPS


def weight(measure: ParamSet | PlancherelParam, p: Partition) -> float:
    """Weight of ``p`` under either kind of measure."""
    if isinstance(measure, PlancherelParam):
        return plancherel_poisson_weight(measure.theta, p)
    return z_weight(measure, p)


def total_mass(measure: ParamSet | PlancherelParam, cutoff: int) -> tuple[float, float]:
    if isinstance(measure, PlancherelParam):
        return plancherel_total_mass(measure.theta, cutoff)
    return z_total_mass(measure, cutoff)


def meixner_weight(c: float, xi: float, l: int) -> float:
    """``(c)_l xi^l / l!``."""
    if l < 0:
        return 0.0
    return math.exp(math.lgamma(c + l) - math.lgamma(c) - math.lgamma(l + 1) + l * math.log(xi))


def krawtchouk_weight(N_tilde: int, p: float, l: int) -> float:
    """Binomial weight ``C(N~, l) p^l (1 - p)^{N~ - l}`` on ``{0, ..., N~}``."""
    if not 0 <= l <= N_tilde:
        raise ValueError(f"l = {l} outside the support 0..{N_tilde}")
    return math.comb(N_tilde, l) * p**l * (1 - p) ** (N_tilde - l)


def krawtchouk_parameters(ps: Degenerate2) -> tuple[int, float]:
    """``(N~, p)`` of the Krawtchouk ensemble attached to a second-degenerate z-measure."""
    return ps.N + ps.N_prime - 1, ps.xi / (ps.xi - 1)


def _rel_close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b)) or a == b


def measure_symmetries_check(ps: ParamSet, p: Partition, rtol: float = 1e-10) -> bool:
    """Check ``M_{z,z'}(p) = M_{z',z}(p)`` and ``M_{z,z'}(p') = M_{-z,-z'}(p)``.

    Raises
    ------
    ValueError
        When ``(-z, -z')`` has no representative in the series of ``ps``.
    """
    reflected = ps.reflected()
    w = z_weight(ps, p)
    swapped = z_weight_direct(ps.z_prime, ps.z, ps.xi, p)
    first = _rel_close(w, swapped, rtol)
    second = _rel_close(z_weight(ps, conjugate(p)), z_weight(reflected, p), rtol)
    return first and second
