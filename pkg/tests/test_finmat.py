"""Sparse matrices, norms, transport multiplication, and serialization."""

import io
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _util import random_matrix, translation, w1, w2
from opdyn import (
    ConvergenceError,
    FiniteMatrix,
    FormatError,
    WindowExceeded,
    compose,
    op_norm,
    projection_matrix,
    shift_multiply,
    trace_norm,
    truncate_left,
    truncate_right,
    unit,
)
from opdyn.finmat import (
    Projection,
    is_monomial,
    permute_multiply,
    read_finmat,
    write_finmat,
)
from opdyn.lattice import shift_power_apply, unitary_power_apply

small_matrices = st.builds(
    random_matrix,
    rng=st.randoms(use_true_random=False),
    m=st.integers(min_value=0, max_value=3),
    density=st.floats(min_value=0.2, max_value=1.0),
)


def dense_of(a: FiniteMatrix) -> np.ndarray:
    rows, cols = a.row_indices(), a.col_indices()
    out = np.zeros((max(len(rows), 1), max(len(cols), 1)))
    ri = {r: k for k, r in enumerate(rows)}
    ci = {c: k for k, c in enumerate(cols)}
    for (i, j), v in a.items():
        out[ri[i], ci[j]] = v
    return out


def dense_shift_power(shift, p, col_range) -> FiniteMatrix:
    entries = {}
    for j in col_range:
        mv = shift_power_apply(shift, p, j)
        entries[(mv.index, j)] = mv.value
    return FiniteMatrix(entries)


def dense_unitary_power(u, p, col_range) -> FiniteMatrix:
    return FiniteMatrix(
        {(unitary_power_apply(u, p, j), j): 1.0 for j in col_range}
    )


# ---------------------------------------------------------------------------
# construction


def test_construction_canonicalizes_and_drops_subdenormals():
    a = FiniteMatrix({(2, 0): 1.0, (-1, 3): 0.5, (0, 0): 1e-301})
    assert a.nnz == 2
    assert list(a.items()) == [((-1, 3), 0.5), ((2, 0), 1.0)]


def test_construction_rejects_non_finite_entries():
    with pytest.raises(ValueError):
        FiniteMatrix({(0, 0): math.inf})
    with pytest.raises(ValueError):
        FiniteMatrix({(0, 0): math.nan})


def test_arithmetic_and_equality():
    a = unit(1, 0, 2.0)
    b = unit(0, 1, 3.0)
    assert (a + b) - b == a
    assert -a == a * (-1.0)
    assert (a - a).is_zero()


def test_projection_window_and_matrix():
    p = Projection(2)
    assert list(p.window()) == [-2, -1, 0, 1, 2]
    assert p.matrix() == projection_matrix(2)


# ---------------------------------------------------------------------------
# composition and truncation


def test_compose_projections_nests():
    assert compose(projection_matrix(2), projection_matrix(1)) == projection_matrix(1)


def test_compose_rank_one_factors():
    a = unit(1, 0, 2.0)
    b = unit(0, -1, 3.0)
    assert compose(a, b) == unit(1, -1, 6.0)
    assert compose(b, a).is_zero()


def test_truncations_cut_rows_and_columns():
    a = unit(5, 0) + unit(0, 5) + unit(1, -1, 3.0)
    assert truncate_left(a, 1) == unit(0, 5) + unit(1, -1, 3.0)
    assert truncate_right(a, 1) == unit(5, 0) + unit(1, -1, 3.0)


@given(small_matrices, st.integers(min_value=0, max_value=3))
def test_truncate_left_is_projection_composition(a, m):
    assert truncate_left(a, m) == compose(projection_matrix(m), a)
    assert truncate_right(a, m) == compose(a, projection_matrix(m))


def test_is_monomial():
    assert is_monomial(unit(0, 3, 2.0) + unit(5, -1, 0.25))
    assert not is_monomial(unit(0, 3) + unit(0, 4))
    assert not is_monomial(unit(0, 3) + unit(1, 3))


# ---------------------------------------------------------------------------
# operator norm


def test_op_norm_examples():
    assert op_norm(projection_matrix(3)) == 1.0
    assert op_norm(unit(5, -5, 2.0)) == 2.0
    block = unit(0, 0) + unit(0, 1) + unit(1, 1)
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    assert abs(op_norm(block) - golden) <= 1e-8
    assert op_norm(FiniteMatrix()) == 0.0


def test_op_norm_tol_domain():
    a = unit(0, 0) + unit(0, 1)
    with pytest.raises(ValueError):
        op_norm(a, tol=0.0)
    with pytest.raises(ValueError):
        op_norm(a, tol=0.5)
    op_norm(a, tol=1e-2)  # upper edge is allowed


def test_op_norm_convergence_error_when_iterations_run_out():
    a = unit(0, 0) + unit(0, 1) + unit(1, 0) + unit(1, 1, -1.0)
    with pytest.raises(ConvergenceError):
        op_norm(a, max_iter=0)


@given(small_matrices)
@settings(max_examples=60)
def test_op_norm_matches_numpy_svd(a):
    got = op_norm(a)
    want = float(np.linalg.norm(dense_of(a), 2))
    assert abs(got - want) <= 1e-8 * (1.0 + want)


def test_monomial_fast_path_agrees_with_power_iteration():
    rng = random.Random(7)
    for _ in range(25):
        entries = {}
        rows = rng.sample(range(-30, 31), 6)
        cols = rng.sample(range(-30, 31), 6)
        for i, j in zip(rows, cols):
            entries[(i, j)] = rng.uniform(-9.0, 9.0)
        a = FiniteMatrix(entries)
        fast = op_norm(a)
        slow = op_norm(a, use_fast_paths=False)
        want = max(abs(v) for _, v in a.items())
        assert fast == want
        assert abs(slow - want) <= 1e-8 * (1.0 + want)


# ---------------------------------------------------------------------------
# trace norm


def test_trace_norm_examples():
    assert trace_norm(projection_matrix(4)) == 9.0
    assert trace_norm(unit(2, 7, 3.0)) == 3.0
    assert trace_norm(unit(1, 0, 2.0) + unit(-1, 3, 5.0)) == 7.0
    assert trace_norm(FiniteMatrix()) == 0.0


@given(small_matrices)
@settings(max_examples=60)
def test_trace_norm_matches_numpy_singular_values(a):
    got = trace_norm(a)
    want = float(np.linalg.svd(dense_of(a), compute_uv=False).sum())
    assert abs(got - want) <= 1e-8 * (1.0 + want)


@given(small_matrices, small_matrices)
@settings(max_examples=40)
def test_norm_inequalities(a, b):
    # operator norm below trace norm; both submultiplicative over compose
    assert op_norm(a) <= trace_norm(a) + 1e-8
    ab = compose(a, b)
    assert op_norm(ab) <= op_norm(a) * op_norm(b) + 1e-8
    assert trace_norm(ab) <= trace_norm(a) * op_norm(b) + 1e-8


# ---------------------------------------------------------------------------
# transport multiplication


@given(
    small_matrices,
    st.integers(min_value=-6, max_value=6),
    st.sampled_from(["left", "right"]),
    st.booleans(),
)
@settings(max_examples=80)
def test_shift_multiply_matches_dense_composition(a, p, side, star):
    shift = w2()
    got = shift_multiply(a, shift, p, side, star=star)
    span = a.support_radius() + abs(p) + 1
    dense = dense_shift_power(shift, p, range(-span, span + 1))
    if star:
        dense = dense.transpose()
    want = compose(dense, a) if side == "left" else compose(a, dense)
    diff = got - want
    assert all(abs(v) <= 1e-12 for _, v in diff.items())


@given(
    small_matrices,
    st.integers(min_value=-6, max_value=6),
    st.sampled_from(["left", "right"]),
)
@settings(max_examples=60)
def test_permute_multiply_matches_dense_composition(a, p, side):
    u = translation(2)
    got = permute_multiply(a, u, p, side)
    span = a.support_radius() + 2 * abs(p) + 1
    dense = dense_unitary_power(u, p, range(-span, span + 1))
    want = compose(dense, a) if side == "left" else compose(a, dense)
    assert got == want


def test_shift_multiply_window_cap():
    with pytest.raises(WindowExceeded):
        shift_multiply(unit(0, 0), w1(), 20, "left", window_cap=10)
    with pytest.raises(WindowExceeded):
        permute_multiply(unit(0, 0), translation(1), 20, "left", window_cap=10)


def test_shift_multiply_rejects_unknown_side():
    with pytest.raises(ValueError):
        shift_multiply(unit(0, 0), w1(), 1, "above")


# ---------------------------------------------------------------------------
# serialization


def round_trip(a: FiniteMatrix) -> FiniteMatrix:
    buf = io.StringIO()
    write_finmat(a, buf)
    return read_finmat(io.StringIO(buf.getvalue()))


@given(small_matrices)
def test_finmat_round_trip_is_bit_exact(a):
    assert round_trip(a) == a


def test_finmat_round_trip_keeps_awkward_doubles():
    a = unit(0, 0, 0.1) + unit(1, -1, 1.0 / 3.0) + unit(-2, 3, 2.0**-40)
    assert round_trip(a) == a


def test_finmat_header_line():
    buf = io.StringIO()
    write_finmat(unit(0, 0), buf)
    assert buf.getvalue().splitlines()[0] == "finmat v1"


@pytest.mark.parametrize(
    "text",
    [
        "",
        "finmat v2\n0 0 1.0\n",
        "finmat v1\n0 0\n",
        "finmat v1\n0 0 1.0 extra\n",
        "finmat v1\nx 0 1.0\n",
        "finmat v1\n0 0 1.0\n0 0 2.0\n",
    ],
)
def test_read_finmat_rejects_malformed_input(text):
    with pytest.raises(FormatError):
        read_finmat(io.StringIO(text))
