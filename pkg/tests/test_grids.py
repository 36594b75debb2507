"""Radial grids, sampled fields with origin/tail closures, and norms."""

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from muskat_profile import ParameterError, RadialField, TailModel, make_log_grid
from muskat_profile.grids import (
    WeightedNormSpec,
    eval as eval_field,
    fd4_log_derivative,
    field_from_csv,
    field_from_json_record,
    field_to_csv,
    field_to_json_record,
    radial_gradient,
    weighted_linf,
)


# ---------------------------------------------------------------------------
# log grids
# ---------------------------------------------------------------------------


def test_log_grid_endpoints_and_count():
    g = make_log_grid(1e-3, 1e3, 241)
    assert g.nodes[0] == 1e-3
    assert g.nodes[-1] == 1e3
    assert g.count == 241
    assert g.r_min == 1e-3 and g.r_max == 1e3


def test_log_grid_decade_node_alignment():
    # 240 intervals over 6 decades: every 40th node sits on an exact decade
    g = make_log_grid(1e-3, 1e3, 241)
    for idx, expect in ((0, 1e-3), (40, 1e-2), (80, 1e-1), (120, 1.0), (160, 10.0), (240, 1e3)):
        assert g.nodes[idx] == pytest.approx(expect, rel=1e-12)


def test_log_grid_decade_marks_cover_range():
    g = make_log_grid(1e-3, 1e3, 241)
    marks = g.decade_marks()
    assert marks[0] <= g.r_min and marks[-1] >= g.r_max
    assert np.all(np.diff(marks) > 0)


@settings(max_examples=50, deadline=None)
@given(
    lo=st.floats(min_value=1e-6, max_value=0.5),
    hi=st.floats(min_value=2.0, max_value=1e6),
    count=st.integers(min_value=16, max_value=400),
)
def test_log_grid_geometric_spacing(lo, hi, count):
    # real grids must straddle r = 1
    g = make_log_grid(lo, hi, count)
    assert np.all(np.diff(g.nodes) > 0)
    ratios = g.nodes[1:] / g.nodes[:-1]
    assert np.max(np.abs(ratios / ratios[0] - 1.0)) < 1e-10


@pytest.mark.parametrize(
    "args",
    [(0.0, 1.0, 64), (-1.0, 1.0, 64), (2.0, 1.0, 64), (1.0, 1.0, 64), (1e-3, 1e3, 2)],
)
def test_log_grid_invalid_arguments(args):
    with pytest.raises(ParameterError):
        make_log_grid(*args)


def test_grids_hash_and_equality():
    a = make_log_grid(1e-3, 1e3, 241)
    b = make_log_grid(1e-3, 1e3, 241)
    c = make_log_grid(1e-3, 1e3, 121)
    assert a == b and hash(a) == hash(b)
    assert a != c


# ---------------------------------------------------------------------------
# fourth-order log-spaced differentiation
# ---------------------------------------------------------------------------


def test_fd4_exact_for_log():
    # log(r) is linear in the stencil variable t = log r: exact derivative
    g = make_log_grid(1e-2, 1e2, 121)
    d = fd4_log_derivative(np.log(g.nodes), g.nodes)
    assert np.max(np.abs(d * g.nodes - 1.0)) < 1e-11


def test_fd4_power_accuracy():
    g = make_log_grid(1e-2, 1e2, 121)
    d = fd4_log_derivative(g.nodes**3, g.nodes)
    rel = np.abs(d / (3.0 * g.nodes**2) - 1.0)
    # one-sided edge stencils are ~an order worse than the interior
    assert np.max(rel[2:-2]) < 1e-4
    assert np.max(rel) < 1e-3


# ---------------------------------------------------------------------------
# sampled fields: closures at the origin, interior, and tail
# ---------------------------------------------------------------------------


def test_field_interior_matches_samples():
    g = make_log_grid(1e-3, 1e3, 241)
    f = RadialField.from_function(lambda r: np.exp(-(r * r)), g)
    assert np.allclose(eval_field(f, g.nodes), np.exp(-g.nodes**2), atol=1e-14)


def test_field_origin_patch_even_extension():
    g = make_log_grid(1e-3, 1e3, 241)
    f = RadialField.from_samples(g, 1.0 / (1.0 + g.nodes**2))
    # extrapolated origin value from the first two samples (even in r)
    assert f.origin_value == pytest.approx(1.0, abs=1e-9)
    assert eval_field(f, 0.0) == pytest.approx(f.origin_value)
    # inside (0, r_min) the patch stays close to the true even function
    r = 0.4e-3
    assert eval_field(f, r) == pytest.approx(1.0 / (1.0 + r * r), abs=1e-9)


def test_field_linear_growth_interpolation_stays_absolute():
    # Interpolating raw values of a slope-s field on a log grid carries an
    # O(h^4 * r) error; the bounded-remainder interpolant must keep the
    # off-node error at plain O(h^4) even at r ~ 500.
    g = make_log_grid(1e-3, 1e3, 241)
    exact = lambda r: 2.0 * r + 1.0 / (1.0 + r * r)
    f = RadialField.from_samples(g, exact(g.nodes), tail_slope=2.0)
    mids = np.sqrt(g.nodes[:-1] * g.nodes[1:])  # off-node points
    band = (mids > 100.0) & (mids < 900.0)
    err = np.abs(eval_field(f, mids[band]) - exact(mids[band]))
    assert np.max(err) < 1e-6


def test_field_tail_evaluation():
    g = make_log_grid(1e-3, 1e3, 241)
    f = RadialField.from_samples(g, 1.0 / g.nodes, tail_slope=0.0)
    # decaying field: fitted asymptotic offset ~ 0, tail value ~ 0
    assert abs(f.tail.offset) < 1e-6
    assert abs(float(eval_field(f, 5e3))) < 1e-3


def test_field_log_tail_fit():
    g = make_log_grid(1e-3, 1e3, 241)
    vals = 3.0 + 0.5 * np.log(g.nodes)
    f = RadialField.from_samples_log_tail(g, vals)
    assert f.tail.log_coef == pytest.approx(0.5, abs=1e-10)
    assert f.tail.offset == pytest.approx(3.0, abs=1e-9)
    r = 1e4
    assert float(eval_field(f, r)) == pytest.approx(3.0 + 0.5 * math.log(r), rel=1e-10)


def test_field_eval_rejects_bad_radii():
    g = make_log_grid(1e-3, 1e3, 241)
    f = RadialField.from_samples(g, np.exp(-g.nodes))
    with pytest.raises(ParameterError):
        eval_field(f, -1.0)
    with pytest.raises(ParameterError):
        eval_field(f, np.array([1.0, np.nan]))


def test_field_validation():
    g = make_log_grid(1e-3, 1e3, 241)
    tail = TailModel(slope=0.0, offset=0.0)
    with pytest.raises(ParameterError):
        RadialField(grid=g, values=np.ones(5), tail=tail, origin_value=0.0)
    bad = np.ones(g.count)
    bad[3] = np.inf
    with pytest.raises(ParameterError):
        RadialField(grid=g, values=bad, tail=tail, origin_value=0.0)
    with pytest.raises(ParameterError):
        RadialField(grid=g, values=np.ones(g.count), tail=tail, origin_value=np.nan)


def test_pchip_preserves_monotonicity():
    g = make_log_grid(1e-3, 1e3, 241)
    f = RadialField.from_samples(g, np.tanh(g.nodes))
    dense = np.geomspace(1e-3, 1e3, 5000)
    vals = eval_field(f, dense)
    assert np.all(np.diff(vals) >= -1e-15)


# ---------------------------------------------------------------------------
# gradient and weighted norms
# ---------------------------------------------------------------------------


def test_radial_gradient_of_sampled_gaussian():
    g = make_log_grid(1e-3, 1e3, 241)
    f = RadialField.from_samples(g, np.exp(-g.nodes**2))
    df = radial_gradient(f)
    band = (g.nodes >= 0.05) & (g.nodes <= 2.0)
    want = -2.0 * g.nodes[band] * np.exp(-g.nodes[band] ** 2)
    assert np.max(np.abs(df.values[band] - want)) < 5e-5


def test_radial_gradient_uses_attached_analytic_derivative():
    g = make_log_grid(1e-3, 1e3, 241)
    f = RadialField.from_function(
        lambda r: np.exp(-(r * r)), g, gradient=lambda r: -2.0 * r * np.exp(-(r * r))
    )
    df = radial_gradient(f)
    want = -2.0 * g.nodes * np.exp(-g.nodes**2)
    assert np.array_equal(df.values, want)


def test_weighted_linf_matches_direct_computation():
    g = make_log_grid(1e-3, 1e3, 241)
    f = RadialField.from_samples(g, g.nodes**2, tail_slope=0.0)
    spec = WeightedNormSpec(gamma=1, weight_exponent=0.75, r_lo=0.1, r_hi=10.0)
    nodes = g.nodes[(g.nodes >= 0.1) & (g.nodes <= 10.0)]
    want = float(np.max(nodes**2 / nodes**0.75))
    assert weighted_linf(f, spec) == pytest.approx(want, rel=1e-14)


def test_weighted_norm_spec_validation():
    with pytest.raises(ParameterError):
        WeightedNormSpec(gamma=3, weight_exponent=1.0, r_lo=0.1, r_hi=1.0)
    with pytest.raises(ParameterError):
        WeightedNormSpec(gamma=1, weight_exponent=1.0, r_lo=1.0, r_hi=0.1)
    g = make_log_grid(1e-3, 1e3, 241)
    f = RadialField.from_samples(g, np.exp(-g.nodes))
    narrow = WeightedNormSpec(gamma=1, weight_exponent=0.0, r_lo=2e3, r_hi=3e3)
    with pytest.raises(ParameterError):
        weighted_linf(f, narrow)


# ---------------------------------------------------------------------------
# tail model and serialization
# ---------------------------------------------------------------------------


def test_tail_model_value_and_derivative():
    t = TailModel(slope=2.0, offset=1.0, log_coef=0.5)
    r = np.array([10.0, 100.0])
    assert np.allclose(t.value(r), 2.0 * r + 1.0 + 0.5 * np.log(r))
    assert np.allclose(t.derivative(r), 2.0 + 0.5 / r)


def test_csv_roundtrip():
    g = make_log_grid(1e-3, 1e3, 121)
    f = RadialField.from_samples(g, np.exp(-g.nodes), tail_slope=0.0)
    buf = io.StringIO()
    field_to_csv(f, buf)
    buf.seek(0)
    back = field_from_csv(buf)
    assert np.array_equal(back.values, f.values)
    assert np.array_equal(back.grid.nodes, f.grid.nodes)
    assert back.tail == f.tail
    assert back.origin_value == f.origin_value


def test_json_roundtrip():
    g = make_log_grid(1e-2, 1e2, 61)
    f = RadialField.from_samples(g, 1.0 / (1.0 + g.nodes**2))
    back = field_from_json_record(field_to_json_record(f))
    assert np.array_equal(back.values, f.values)
    assert back.tail == f.tail
