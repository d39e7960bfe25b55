import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dppkernels.measures import (
    Complementary,
    Degenerate1,
    Degenerate2,
    PlancherelParam,
    Principal,
    krawtchouk_parameters,
    krawtchouk_weight,
    measure_from_json,
    measure_symmetries_check,
    meixner_weight,
    plancherel_fixed_n_weight,
    plancherel_poisson_weight,
    plancherel_total_mass,
    size_pmf,
    z_total_mass,
    z_weight,
    z_weight_direct,
)
from dppkernels.partitions import Partition, conjugate, enumerate_partitions, partitions_of, to_N_config
from oracles import z_weight_reference

SMALL = list(enumerate_partitions(8))


def test_series_validation():
    with pytest.raises(ValueError):
        Principal(1.0, 0.0, 0.2)
    with pytest.raises(ValueError):
        Principal(1.0, 1.0, 1.2)
    with pytest.raises(ValueError):
        Complementary(0.3, 1.6, 0.2)  # different unit intervals
    with pytest.raises(ValueError):
        Complementary(1.0, 1.5, 0.2)  # integer endpoint
    with pytest.raises(ValueError):
        Degenerate1(2, -0.5, 0.3)
    with pytest.raises(ValueError):
        Degenerate2(2, 3, 0.5)


def test_derived_accessors():
    ps = Principal(1.0, 2.0, 0.3)
    assert ps.zz == pytest.approx(5.0)
    assert ps.z_plus_zp == pytest.approx(2.0)
    assert ps.product_at(1.0) == pytest.approx(abs(complex(2, 2)) ** 2)
    d1 = Degenerate1(3, 1.5, 0.3)
    assert d1.z == 3 and d1.z_prime == 3.5
    assert d1.product_at(-3.0) == 0.0
    d2 = Degenerate2(2, 3, -0.5)
    assert d2.zz == -6 and d2.product_at(0.5) == pytest.approx(2.5 * -2.5)


@pytest.mark.parametrize(
    "ps",
    [Principal(1.0, 1.0, 0.2), Complementary(0.3, 0.6, 0.4), Degenerate1(2, 1.5, 0.3), Degenerate2(2, 3, -0.5), PlancherelParam(0.5)],
)
def test_json_round_trip(ps):
    assert measure_from_json(ps.to_json()) == ps


def test_weight_examples():
    ps = Principal(1.0, 1.0, 0.2)
    assert z_weight(ps, Partition()) == pytest.approx(0.8**2, rel=1e-14)
    assert z_weight(ps, Partition((1,))) == pytest.approx(0.256, rel=1e-14)
    assert z_weight(Degenerate1(1, 1.0, 0.5), Partition((1, 1))) == 0.0


def test_weight_matches_definition():
    cases = [Principal(0.4, 1.3, 0.35), Complementary(-1.7, -1.2, 0.5), Degenerate1(3, 0.7, 0.4), Degenerate2(2, 3, -0.8)]
    for ps in cases:
        for p in SMALL:
            ref = z_weight_reference(complex(ps.z), complex(ps.z_prime), ps.xi, p.parts)
            got = z_weight(ps, p)
            assert got == pytest.approx(ref, rel=1e-10, abs=1e-300)
            assert z_weight_direct(ps.z, ps.z_prime, ps.xi, p) == pytest.approx(ref, rel=1e-10, abs=1e-300)


def _random_paramset(rng: random.Random, series: str):
    if series == "principal":
        return Principal(rng.uniform(-3, 3), rng.choice([-1, 1]) * rng.uniform(0.05, 3), rng.uniform(0.01, 0.95))
    if series == "complementary":
        m = rng.randint(-3, 2)
        return Complementary(m + rng.uniform(0.01, 0.99), m + rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.95))
    if series == "degenerate1":
        return Degenerate1(rng.randint(1, 5), rng.uniform(0.05, 4), rng.uniform(0.01, 0.95))
    return Degenerate2(rng.randint(1, 4), rng.randint(1, 4), -rng.uniform(0.01, 5))


@pytest.mark.parametrize("series", ["principal", "complementary", "degenerate1", "degenerate2"])
def test_weights_nonnegative(series):
    rng = random.Random(20261016)
    for _ in range(1000):
        ps = _random_paramset(rng, series)
        p = rng.choice(SMALL)
        w = z_weight(ps, p)
        assert w >= 0
        if series in ("principal", "complementary"):
            assert w > 0


def test_degenerate1_support_is_length_at_most_N():
    ps = Degenerate1(2, 1.5, 0.4)
    for p in SMALL:
        assert (z_weight(ps, p) > 0) == (p.length() <= 2)


def test_degenerate2_support_is_rectangle():
    ps = Degenerate2(2, 3, -0.5)
    rect = Partition((3, 3))
    for p in SMALL:
        assert (z_weight(ps, p) != 0) == rect.contains(p)


def test_total_mass_examples():
    partial, tail = z_total_mass(Degenerate2(1, 1, -1.0), 1)
    assert partial == 1.0 and tail == 0.0
    ps = Principal(1.0, 1.0, 0.2)
    partial, tail = z_total_mass(ps, 12)
    assert 1 - tail <= partial <= 1 + 1e-12
    assert z_total_mass(ps, 0)[0] == pytest.approx(0.8**2)
    partial, tail = z_total_mass(ps, 16)
    assert partial >= 1 - 1e-8


@pytest.mark.parametrize("ps", [Principal(1.0, 1.0, 0.2), Complementary(0.3, 0.6, 0.4), Degenerate1(3, 1.5, 0.3), Degenerate2(2, 2, -0.5)])
def test_total_mass_monotone_and_certified(ps):
    prev = 0.0
    for L in range(0, 15):
        partial, tail = z_total_mass(ps, L)
        assert partial >= prev - 1e-15
        assert partial <= 1 + 1e-12
        assert 1 - partial <= tail + 1e-15
        prev = partial


def test_size_marginal_matches_enumeration():
    ps = Complementary(0.3, 0.6, 0.4)
    for n in range(8):
        assert math.fsum(z_weight(ps, p) for p in partitions_of(n)) == pytest.approx(size_pmf(ps, n), rel=1e-12)


def test_plancherel_weights():
    assert plancherel_poisson_weight(2.0, Partition()) == pytest.approx(math.exp(-2.0))
    assert plancherel_poisson_weight(1.0, Partition((1,))) == pytest.approx(math.exp(-1.0))
    assert plancherel_poisson_weight(1.0, Partition((2, 1))) == pytest.approx(math.exp(-1.0) / 9)
    assert plancherel_fixed_n_weight(1, Partition((1,))) == 1
    assert plancherel_fixed_n_weight(2, Partition((2,))) == Fraction(1, 2)
    assert plancherel_fixed_n_weight(3, Partition((2, 1))) == Fraction(4, 6)
    for n in range(9):
        assert sum(plancherel_fixed_n_weight(n, p) for p in partitions_of(n)) == 1
    with pytest.raises(ValueError):
        plancherel_fixed_n_weight(3, Partition((1,)))
    partial, tail = plancherel_total_mass(0.5, 14)
    assert 1 - tail <= partial <= 1 + 1e-12


def test_meixner_and_krawtchouk_weights():
    assert meixner_weight(2.3, 0.4, 0) == 1.0
    assert meixner_weight(1.0, 0.4, 5) == pytest.approx(0.4**5)
    assert meixner_weight(1.5, 0.3, 2) == pytest.approx(0.16875, rel=1e-14)
    assert krawtchouk_weight(4, 0.3, 0) == pytest.approx(0.7**4)
    assert krawtchouk_weight(1, 0.3, 1) == pytest.approx(0.3)
    assert math.fsum(krawtchouk_weight(9, 0.37, l) for l in range(10)) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        krawtchouk_weight(4, 0.3, 5)
    N_tilde, p = krawtchouk_parameters(Degenerate2(2, 3, -1.0))
    assert N_tilde == 4 and p == 0.5


def test_symmetry_examples():
    assert measure_symmetries_check(Complementary(0.3, 0.6, 0.4), Partition((2, 1)))
    assert measure_symmetries_check(Principal(0.5, 1.5, 0.3), Partition())
    d2 = Degenerate2(2, 3, -0.5)
    assert measure_symmetries_check(d2, Partition((3, 1)))
    # the second identity written out: M under (3, 2) at lambda' equals M under (2, 3) at lambda
    lam = Partition((3, 1))
    assert z_weight(Degenerate2(3, 2, -0.5), conjugate(lam)) == pytest.approx(z_weight(d2, lam), rel=1e-12)
    with pytest.raises(ValueError):
        measure_symmetries_check(Degenerate1(2, 1.0, 0.3), Partition((1,)))


def test_symmetries_random():
    rng = random.Random(7)
    for _ in range(100):
        ps = _random_paramset(rng, rng.choice(["principal", "complementary", "degenerate2"]))
        assert measure_symmetries_check(ps, rng.choice(SMALL))


def _vandermonde_log_ratio(weight, X, Y):
    def logp(Z):
        s = sum(math.log(weight(z)) for z in Z)
        s += sum(2 * math.log(abs(a - b)) for a, b in itertools.combinations(Z, 2))
        return s

    return logp(X) - logp(Y)


def test_degenerate1_pushforward_is_meixner_ensemble():
    rng = random.Random(11)
    ps = Degenerate1(3, 1.5, 0.3)
    pool = [p for p in enumerate_partitions(10) if p.length() <= 3]
    for _ in range(100):
        a, b = rng.sample(pool, 2)
        lhs = math.log(z_weight(ps, a)) - math.log(z_weight(ps, b))
        rhs = _vandermonde_log_ratio(lambda l: meixner_weight(1.5, 0.3, l), to_N_config(a, 3), to_N_config(b, 3))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


def test_degenerate2_pushforward_is_krawtchouk_ensemble():
    rng = random.Random(12)
    ps = Degenerate2(2, 3, -0.7)
    N_tilde, p = krawtchouk_parameters(ps)
    pool = [q for q in enumerate_partitions(6) if z_weight(ps, q) > 0]
    for _ in range(100):
        a, b = rng.sample(pool, 2)
        lhs = math.log(z_weight(ps, a)) - math.log(z_weight(ps, b))
        rhs = _vandermonde_log_ratio(lambda l: krawtchouk_weight(N_tilde, p, l), to_N_config(a, 2), to_N_config(b, 2))
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@given(st.floats(0.05, 0.9), st.floats(-2, 2), st.floats(0.1, 2))
@settings(max_examples=50, deadline=None)
def test_principal_weights_sum_below_one(xi, a, b):
    partial, tail = z_total_mass(Principal(a, b, xi), 6)
    assert partial <= 1 + 1e-12
