import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dppkernels.partitions import (
    LatticePoint,
    Partition,
    PointConfigWindow,
    as_lattice_point,
    conjugate,
    dimension,
    enumerate_partitions,
    from_N_config,
    partitions_of,
    pochhammer_lambda,
    pochhammer_lambda_rows,
    size,
    to_N_config,
    to_semi_infinite_config,
)
from oracles import partition_count, syt_count

partitions = st.lists(st.integers(1, 8), max_size=8).map(lambda xs: Partition(sorted(xs, reverse=True)))


def test_partition_normalizes_trailing_zeros():
    assert Partition((3, 1, 0, 0)).parts == (3, 1)


@pytest.mark.parametrize("bad", [(1, 2), (2, -1, 0), (0, 1)])
def test_partition_rejects_invalid(bad):
    with pytest.raises(ValueError):
        Partition(bad)


@pytest.mark.parametrize("parts,expected", [((), 0), ((2, 1), 3), ((4, 4, 1), 9)])
def test_size(parts, expected):
    p = Partition(parts)
    assert size(p) == expected
    assert p.length() == len(parts)


@pytest.mark.parametrize("parts,expected", [((), ()), ((3, 1), (2, 1, 1)), ((2, 2), (2, 2))])
def test_conjugate_examples(parts, expected):
    assert conjugate(Partition(parts)).parts == expected


@given(partitions)
@settings(max_examples=300)
def test_conjugate_is_involution(p):
    assert conjugate(conjugate(p)) == p
    assert size(conjugate(p)) == size(p)


@pytest.mark.parametrize("parts,expected", [((1,), 1), ((2, 1), 2), ((3, 2), 5)])
def test_dimension_examples(parts, expected):
    assert dimension(Partition(parts)) == expected
    assert syt_count(parts) == expected


def test_dimension_matches_backtracking_oracle():
    for n in range(1, 11):
        for p in partitions_of(n):
            assert dimension(p) == syt_count(p.parts)


def test_dimension_conjugation_invariant():
    for n in range(13):
        for p in partitions_of(n):
            assert dimension(p) == dimension(conjugate(p))


def test_sum_of_squared_dimensions_is_factorial():
    for n in range(11):
        assert sum(dimension(p) ** 2 for p in partitions_of(n)) == math.factorial(n)


def test_dimension_exact_at_cap():
    # |p| = 30: hook products far exceed 64 bits; must stay exact
    p = Partition((6, 5, 5, 4, 4, 3, 2, 1))
    assert dimension(p) * 1 == syt_count(p.parts)


def test_pochhammer_examples():
    z = 0.7 + 1.3j
    assert pochhammer_lambda(z, Partition()) == 1
    assert pochhammer_lambda(z, Partition((1,))) == z
    assert pochhammer_lambda(z, Partition((2, 1))) == pytest.approx(z * (z + 1) * (z - 1), rel=1e-14)


@given(partitions, st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False))
@settings(max_examples=300)
def test_pochhammer_box_and_row_forms_agree(p, z):
    a = pochhammer_lambda(z, p)
    b = pochhammer_lambda_rows(z, p)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_conjugate_pair_product_nonnegative():
    a, b = 0.4, 1.1
    for p in partitions_of(6):
        prod = pochhammer_lambda(complex(a, b), p) * pochhammer_lambda(complex(a, -b), p)
        assert abs(prod.imag) < 1e-9 * abs(prod)
        assert prod.real >= 0


def test_lattice_point_storage():
    x = LatticePoint(5)
    assert x.x == 2.5 and x.twice_x == 5
    assert LatticePoint.from_value(Fraction(-7, 2)) == -7
    with pytest.raises(ValueError):
        LatticePoint(4)
    with pytest.raises(ValueError):
        as_lattice_point(3)
    with pytest.raises(ValueError):
        as_lattice_point(0.3)
    assert as_lattice_point(-0.5) == LatticePoint(-1)


def _config(parts):
    w = to_semi_infinite_config(Partition(parts), (-4.5, 4.5))
    return sorted((int(m) for m in w.members), reverse=True)


@pytest.mark.parametrize(
    "parts,expected",
    [
        ((), [-1, -3, -5, -7, -9]),
        ((1,), [1, -3, -5, -7, -9]),
        ((3, 1), [5, -1, -5, -7, -9]),
    ],
)
def test_semi_infinite_config_examples(parts, expected):
    assert _config(parts) == expected


def test_point_config_window_rejects_outside_members():
    with pytest.raises(ValueError):
        PointConfigWindow(LatticePoint(-3), LatticePoint(3), frozenset({LatticePoint(5)}))


@pytest.mark.parametrize("parts,N,expected", [((), 3, (2, 1, 0)), ((2, 1), 3, (4, 2, 0)), ((5,), 2, (6, 0))])
def test_to_N_config_examples(parts, N, expected):
    assert to_N_config(Partition(parts), N) == expected
    assert from_N_config(expected) == Partition(parts)


def test_to_N_config_rejects_long_partitions():
    with pytest.raises(ValueError):
        to_N_config(Partition((1, 1, 1)), 2)


@given(partitions, st.integers(1, 10))
@settings(max_examples=200)
def test_N_config_shift_reproduces_semi_infinite_config(p, N):
    if p.length() > N:
        return
    shifted = [2 * l - 2 * N + 1 for l in to_N_config(p, N)]  # doubled l - (N - 1/2)
    tail = [1 - 2 * i for i in range(N + 1, N + 12)]
    lo, hi = -2 * N - 21, 2 * max(p.parts, default=0) + 3
    window = to_semi_infinite_config(p, (Fraction(lo, 2), Fraction(hi, 2)))
    expected = {x for x in shifted + tail if lo <= x <= hi}
    assert {int(m) for m in window.members} == expected


def test_enumeration_examples():
    assert list(enumerate_partitions(0)) == [Partition()]
    assert [p.parts for p in enumerate_partitions(2)] == [(), (1,), (2,), (1, 1)]
    assert sum(1 for _ in enumerate_partitions(10)) == 139


def test_enumeration_counts_match_pentagonal_recurrence():
    for n in range(21):
        assert len(partitions_of(n)) == partition_count(n)
        assert len(set(partitions_of(n))) == partition_count(n)


def test_enumeration_order_is_size_then_lex_decreasing():
    seq = [p.parts for p in enumerate_partitions(8)]
    for a, b in zip(seq, seq[1:]):
        assert sum(a) < sum(b) or (sum(a) == sum(b) and a > b)


def test_enumeration_cap():
    with pytest.raises(ValueError):
        list(enumerate_partitions(31))


def test_json_round_trip():
    p = Partition((3, 1))
    assert p.to_json() == [3, 1]
    assert Partition.from_json([3, 1]) == p
    assert to_semi_infinite_config(p, (-1.5, 2.5)).to_json() == [-1, 5]
