"""Weighted shifts, permutation unitaries, and closed-form product norms."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from _util import (
    flog,
    frac_chain_norm,
    frac_shift_power,
    frac_w1,
    frac_w2,
    log_rel_close,
    translation,
    w1,
    w2,
)
from opdyn import (
    HorizonExceeded,
    PermutationUnitary,
    WeightedShift,
    WeightRule,
    WindowExceeded,
    escape_index,
    monomial_product_norm,
    monomial_product_norm_rowcut,
    shift_power_apply,
    shift_star_power_apply,
    unitary_power_apply,
)


def explicit_rule(mapping, default=1.0) -> WeightRule:
    return WeightRule.explicit(mapping, default=default)


# ---------------------------------------------------------------------------
# weight rules


def test_piecewise_weights_split_at_zero():
    rule = WeightRule.piecewise(2.0, 0.5)
    assert rule.weight(-1) == 2.0
    assert rule.weight(-100) == 2.0
    assert rule.weight(0) == 0.5
    assert rule.weight(7) == 0.5


def test_explicit_weights_fall_back_to_default():
    rule = explicit_rule({3: 5.0, -2: 0.25}, default=1.5)
    assert rule.weight(3) == 5.0
    assert rule.weight(-2) == 0.25
    assert rule.weight(0) == 1.5


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_weight_rules_reject_nonpositive_and_nonfinite(bad):
    with pytest.raises(ValueError):
        WeightRule.piecewise(bad, 1.0)
    with pytest.raises(ValueError):
        WeightRule.piecewise(1.0, bad)
    with pytest.raises(ValueError):
        explicit_rule({0: bad})
    with pytest.raises(ValueError):
        explicit_rule({}, default=bad)


def test_duplicate_table_indices_rejected():
    with pytest.raises(ValueError):
        WeightRule(kind="explicit", table=((0, 1.0), (0, 2.0)), default=1.0)


# ---------------------------------------------------------------------------
# shift powers


def test_shift_power_examples():
    mv = shift_power_apply(w1(), 1, -1)
    assert (mv.index, mv.value) == (0, 2.0)
    mv = shift_power_apply(w1(), 0, 5)
    assert (mv.index, mv.value) == (5, 1.0)
    mv = shift_power_apply(w1(), 2, -1)
    assert mv.index == 1
    assert mv.log_coeff == 0.0  # weights 2 and 1/2 cancel in the log domain


def test_negative_power_divides_by_the_departing_weights():
    # W^{-1} e_0 = e_{-1} / w(-1)
    mv = shift_power_apply(w1(), -1, 0)
    assert mv.index == -1
    assert math.isclose(mv.value, 0.5, rel_tol=1e-12)


@given(
    n=st.integers(min_value=-60, max_value=60),
    j=st.integers(min_value=-40, max_value=40),
)
def test_shift_power_matches_exact_fraction_walk(n, j):
    mv = shift_power_apply(w2(), n, j)
    frac, idx = frac_shift_power(frac_w2, n, j)
    assert mv.index == idx
    assert log_rel_close(mv.value, flog(frac), 1e-12)


@given(
    n=st.integers(min_value=-50, max_value=50),
    j=st.integers(min_value=-30, max_value=30),
)
def test_shift_power_round_trip_cancels_in_log_domain(n, j):
    fwd = shift_power_apply(w1(), n, j)
    back = shift_power_apply(w1(), -n, fwd.index)
    assert back.index == j
    assert abs(fwd.log_coeff + back.log_coeff) <= 1e-12


@given(
    n=st.integers(min_value=-40, max_value=40),
    j=st.integers(min_value=-30, max_value=30),
)
def test_star_power_is_the_transposed_transport(n, j):
    # (W*)^n e_j lands on e_{j-n} with the coefficient W^n picks up there.
    starred = shift_star_power_apply(w2(), n, j)
    plain = shift_power_apply(w2(), n, j - n)
    assert starred.index == j - n
    assert starred.log_coeff == plain.log_coeff


def test_shift_power_beyond_horizon_raises():
    with pytest.raises(HorizonExceeded):
        shift_power_apply(w1(), 11, 0, horizon=10)
    with pytest.raises(HorizonExceeded):
        shift_power_apply(w1(), -11, 0, horizon=10)


# ---------------------------------------------------------------------------
# permutation unitaries


def test_translation_powers():
    u = translation(1)
    assert unitary_power_apply(u, 3, 0) == 3
    assert unitary_power_apply(u, -2, 5) == 3
    assert unitary_power_apply(u, 0, -4) == -4


def test_table_unitary_follows_the_table():
    u = PermutationUnitary.from_table({0: 2, 2: -1, -1: 0})
    assert unitary_power_apply(u, 1, 0) == 2
    assert unitary_power_apply(u, 2, 0) == -1
    assert unitary_power_apply(u, 3, 0) == 0
    assert unitary_power_apply(u, -1, 2) == 0


def test_table_unitary_rejects_non_injective_maps():
    with pytest.raises(ValueError):
        PermutationUnitary.from_table({0: 1, 2: 1})


def test_table_departure_raises_window_exceeded():
    u = PermutationUnitary.from_table({0: 1})
    with pytest.raises(WindowExceeded):
        unitary_power_apply(u, 2, 0)


# ---------------------------------------------------------------------------
# escape index


def test_escape_index_examples():
    assert escape_index(translation(1), 2, 100) == 5
    assert escape_index(translation(3), 0, 100) == 1
    assert escape_index(translation(1), 0, 100) == 1


@given(
    t=st.integers(min_value=-6, max_value=6).filter(lambda v: v != 0),
    m=st.integers(min_value=0, max_value=12),
)
def test_escape_index_of_translation_is_window_over_step(t, m):
    # the window [-m, m] has 2m + 1 points and each power moves it by t
    expected = -((2 * m + 1) // -abs(t))  # ceiling division
    assert escape_index(translation(t), m, 200) == expected


def test_identity_like_table_never_escapes():
    u = PermutationUnitary.from_table({j: j for j in range(-3, 4)})
    assert escape_index(u, 2, 50) is None


def test_escape_index_none_when_orbit_leaves_the_table():
    # after one step the orbit leaves the table, so no horizon-long
    # certificate of staying out of the window can be produced
    u = PermutationUnitary.from_table({0: 1})
    assert escape_index(u, 0, 50) is None


# ---------------------------------------------------------------------------
# monomial product norms


def test_product_norm_doubling_tripling_pair_at_n2():
    factors = [(w1(), 2), (w2(), -4)]
    got = monomial_product_norm(factors, 0)
    assert log_rel_close(got.value, math.log(4.0 / 81.0), 1e-12)


def test_product_norm_single_positive_power():
    got = monomial_product_norm([(w1(), 3)], 0)
    assert math.isclose(got.value, 0.125, rel_tol=1e-12)


def test_product_norm_zero_power_is_one():
    got = monomial_product_norm([(w1(), 0)], 4)
    assert got.value == 1.0


def test_product_norm_tie_attained_at_smallest_index():
    flat = WeightedShift(WeightRule.piecewise(1.0, 1.0))
    got = monomial_product_norm([(flat, 5)], 3)
    assert got.attained_at == -3


@given(
    m=st.integers(min_value=0, max_value=4),
    p=st.integers(min_value=0, max_value=25),
    q=st.integers(min_value=0, max_value=25),
)
def test_product_norm_matches_exact_fraction_chain(m, p, q):
    factors = [(w1(), p), (w2(), -q)]
    got = monomial_product_norm(factors, m)
    frac, at = frac_chain_norm([(frac_w1, p), (frac_w2, -q)], m)
    assert log_rel_close(got.value, flog(frac), 1e-10)
    assert got.attained_at == at


@given(
    m=st.integers(min_value=0, max_value=4),
    p=st.integers(min_value=0, max_value=20),
    q=st.integers(min_value=0, max_value=20),
)
def test_rowcut_star_norm_equals_mirrored_column_norm(m, p, q):
    # cutting rows after adjoint factors measures the same product as
    # cutting columns before the unstarred factors in reverse order
    rowcut = monomial_product_norm_rowcut([(w2(), -q), (w1(), p)], m, star=True)
    colcut = monomial_product_norm([(w1(), p), (w2(), -q)], m)
    assert rowcut.log_value == colcut.log_value


def test_rowcut_without_star_cuts_rows_of_the_plain_product():
    # P_0 W_1^2 keeps the single path that lands on row 0
    got = monomial_product_norm_rowcut([(w1(), 2)], 0)
    frac, _ = frac_shift_power(frac_w1, 2, -2)
    assert log_rel_close(got.value, flog(frac), 1e-12)
