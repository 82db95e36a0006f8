import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from pkscale.config import PrecisionConfig
from pkscale.costs import MacCounter
from pkscale.errors import DimensionMismatch, DomainError
from pkscale.gemm import (
    GemmPlan,
    Orientation,
    gemm_conventional,
    gemm_partial,
    gemm_projected,
    project_right_operand,
    reorder_block_major,
    restore_block_major,
)
from pkscale.projection import make_dct_pair, make_haar_pair

EXACT_REL = 1e-12


def test_conventional_hand_value():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[5.0, 6.0], [7.0, 8.0]])
    assert_allclose(gemm_conventional(a, b, 2), [[19.0, 22.0], [43.0, 50.0]])


def test_conventional_matches_numpy_with_borders():
    rng = np.random.default_rng(3)
    a = rng.uniform(-1, 1, (7, 11))
    b = rng.uniform(-1, 1, (11, 5))
    assert_allclose(gemm_conventional(a, b, 4), a @ b, rtol=EXACT_REL, atol=1e-14)


def test_conventional_rejects_mismatched_inner():
    with pytest.raises(DimensionMismatch):
        gemm_conventional(np.ones((2, 3)), np.ones((4, 2)), 2)


def test_plan_describe_and_borders():
    with pytest.warns(UserWarning):
        plan = GemmPlan(10, 12, 8, 5)
    assert plan.borders() == (0, 2, 3)
    assert "cleanup borders 0x2x3" in plan.describe()
    plan8 = GemmPlan(16, 16, 16, 8)
    assert plan8.borders() == (0, 0, 0)


def test_plan_rejects_bad_geometry():
    with pytest.raises(DomainError):
        GemmPlan(0, 4, 4, 2)
    with pytest.raises(DomainError):
        GemmPlan(4, 4, 4, 0)
    with pytest.raises(DomainError):
        GemmPlan(4, 4, 4, 4, repr_bits=16)


def test_reorder_round_trip_row_wise():
    rng = np.random.default_rng(7)
    m = rng.uniform(-1, 1, (6, 10))
    ro = reorder_block_major(m, 4, Orientation.ROW_WISE)
    assert_allclose(restore_block_major(ro), m)


def test_reorder_round_trip_col_wise():
    rng = np.random.default_rng(8)
    m = rng.uniform(-1, 1, (9, 5))
    ro = reorder_block_major(m, 3, Orientation.COL_WISE)
    assert_allclose(restore_block_major(ro), m)


def test_reorder_data_layout_hand_value():
    m = np.arange(16.0).reshape(4, 4)
    ro = reorder_block_major(m, 2, Orientation.ROW_WISE)
    # first block is the top-left 2x2, row-major
    assert_allclose(ro.data[:4], [0.0, 1.0, 4.0, 5.0])
    co = reorder_block_major(m, 2, Orientation.COL_WISE)
    # first block is the same 2x2 but column-major
    assert_allclose(co.data[:4], [0.0, 4.0, 1.0, 5.0])


def test_fused_reorder_projects_blocks():
    rng = np.random.default_rng(9)
    pair = make_haar_pair(2)
    m = rng.uniform(-1, 1, (4, 4))
    ro = reorder_block_major(m, 4, Orientation.ROW_WISE, pair=pair, projections=2)
    from pkscale.projection import project_rows

    for l in range(2):
        assert_allclose(ro.projected_block(l, 0, 0), project_rows(m, pair, l))


def test_fused_reorder_requires_clean_blocking():
    pair = make_haar_pair(2)
    with pytest.raises(DomainError):
        reorder_block_major(np.ones((5, 4)), 4, Orientation.ROW_WISE,
                            pair=pair, projections=1)
    with pytest.raises(DomainError):
        reorder_block_major(np.ones((4, 4)), 3, Orientation.ROW_WISE,
                            pair=pair, projections=1)


def test_projected_block_requires_fused_path():
    ro = reorder_block_major(np.ones((4, 4)), 2, Orientation.ROW_WISE)
    with pytest.raises(DomainError):
        ro.projected_block(0, 0, 0)


def test_full_projection_equals_plain():
    rng = np.random.default_rng(21)
    pair = make_dct_pair(8)
    a = rng.uniform(-1, 1, (6, 16))
    b = rng.uniform(-1, 1, (16, 9))
    cfg = PrecisionConfig(8, 8)
    exact = a @ b
    approx = gemm_projected(a, b, pair, cfg)
    assert_allclose(approx, exact, rtol=EXACT_REL, atol=1e-13)


def test_projected_constant_operands_exact_at_one_projection():
    # constants live entirely in the mean component, so one cosine
    # projection already reproduces the product
    pair = make_dct_pair(4)
    a = np.full((3, 8), 2.0)
    b = np.full((8, 2), 0.5)
    out = gemm_projected(a, b, pair, PrecisionConfig(4, 1))
    assert_allclose(out, a @ b, rtol=EXACT_REL)


def test_projected_partial_sums_are_additive():
    rng = np.random.default_rng(30)
    pair = make_dct_pair(4)
    a = rng.uniform(-1, 1, (5, 12))
    b = rng.uniform(-1, 1, (12, 7))
    total = np.zeros((5, 7))
    for used in range(1, 5):
        total += gemm_partial(a, b, pair, used - 1)
        assert_allclose(gemm_projected(a, b, pair, PrecisionConfig(4, used)),
                        total, rtol=EXACT_REL, atol=1e-13)


def test_projected_pads_odd_inner_dimension():
    rng = np.random.default_rng(31)
    pair = make_dct_pair(8)
    a = rng.uniform(-1, 1, (4, 13))
    b = rng.uniform(-1, 1, (13, 6))
    out = gemm_projected(a, b, pair, PrecisionConfig(8, 8))
    assert out.shape == (4, 6)
    assert_allclose(out, a @ b, rtol=EXACT_REL, atol=1e-13)


def test_projected_right_cache_matches_uncached():
    rng = np.random.default_rng(32)
    pair = make_dct_pair(4)
    a = rng.uniform(-1, 1, (5, 10))
    b = rng.uniform(-1, 1, (10, 3))
    cfg = PrecisionConfig(4, 3)
    cache = project_right_operand(b, pair, 3)
    assert_allclose(gemm_projected(a, b, pair, cfg, right_cache=cache),
                    gemm_projected(a, b, pair, cfg), rtol=EXACT_REL)


def test_projected_right_cache_validated():
    pair = make_dct_pair(4)
    a = np.ones((2, 8))
    b = np.ones((8, 2))
    short = project_right_operand(b, pair, 1)
    with pytest.raises(DomainError):
        gemm_projected(a, b, pair, PrecisionConfig(4, 2), right_cache=short)
    wrong = [np.ones((5, 2))]
    with pytest.raises(DimensionMismatch):
        gemm_projected(a, b, pair, PrecisionConfig(4, 1), right_cache=wrong)


def test_projected_config_pair_size_must_match():
    pair = make_dct_pair(4)
    with pytest.raises(DomainError):
        gemm_projected(np.ones((2, 8)), np.ones((8, 2)), pair, PrecisionConfig(8, 1))


def test_projected_counter_charges_padding_and_accumulation():
    pair = make_dct_pair(4)
    a = np.ones((3, 6))     # pads to 3 x 8
    b = np.ones((6, 2))     # pads to 8 x 2
    counter = MacCounter()
    gemm_projected(a, b, pair, PrecisionConfig(4, 2), counter=counter)
    per_pass = 3 * 8 + 8 * 2 + 3 * 2 * 2
    expected = 2 * per_pass + 3 * 2    # one accumulation beyond the first pass
    assert counter.count == expected


def test_conventional_counter_is_mkw():
    counter = MacCounter()
    gemm_conventional(np.ones((5, 7)), np.ones((7, 3)), 4, counter=counter)
    assert counter.count == 5 * 7 * 3


def test_float32_inputs_stay_float32():
    pair = make_haar_pair(2)
    a = np.ones((2, 4), dtype=np.float32)
    b = np.ones((4, 2), dtype=np.float32)
    assert gemm_projected(a, b, pair, PrecisionConfig(2, 2)).dtype == np.float32
    assert gemm_conventional(a, b, 2).dtype == np.float32


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(1, 3), st.integers(1, 6), st.integers(1, 4))
def test_projected_full_sum_matches_numpy(m, kg, w, block_groups):
    rng = np.random.default_rng(m * 1000 + kg * 100 + w * 10 + block_groups)
    pair = make_haar_pair(4)
    a = rng.uniform(-1, 1, (m, 4 * kg))
    b = rng.uniform(-1, 1, (4 * kg, w))
    out = gemm_projected(a, b, pair, PrecisionConfig(4, 4))
    assert_allclose(out, a @ b, rtol=0, atol=1e-12 * max(1.0, np.abs(a @ b).max()))


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 9), st.integers(2, 9), st.integers(2, 9), st.integers(1, 10))
def test_conventional_any_blocking_matches_numpy(m, k, w, block):
    rng = np.random.default_rng(m * 729 + k * 81 + w * 9 + block)
    a = rng.uniform(-1, 1, (m, k))
    b = rng.uniform(-1, 1, (k, w))
    assert_allclose(gemm_conventional(a, b, block), a @ b,
                    rtol=0, atol=1e-12 * max(1.0, np.abs(a @ b).max()))
