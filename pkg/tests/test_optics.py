import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from biphoton import fields, optics, propagation
from biphoton.errors import OverlappingSlits, UnderResolvedSlit
from biphoton.fields import ComplexField2D
from biphoton.grid import Grid1D
from biphoton.params import ExperimentParams

P = ExperimentParams()
MASK = optics.DoubleSlitMask.from_params(P)
AP = optics.aperture_grid(P)


def slit_field(params, nodes_per_slit=16):
    """Normalised closed-form slit-plane state on the slit-tiling grid."""
    ap = optics.aperture_grid(params, nodes_per_slit)
    gb = propagation.propagate_analytic(params, params.dist_source_slit)
    return propagation.sample_gaussian(gb, ap, ap, check=False)


def test_mask_rejects_overlap():
    with pytest.raises(OverlappingSlits):
        optics.DoubleSlitMask(1.0, 1.0)


def test_slit_membership_closed_intervals():
    # edge points transmit
    h, e = MASK.slit_sep / 2, MASK.slit_width / 2
    idx = MASK.slit_index(np.array([0.0, -h, h, h - e, h + e, h + 1.01 * e]))
    assert idx.tolist() == [0, -1, 1, 1, 1, 0]


def test_mask_blocks_between_and_keeps_inside():
    f = ComplexField2D(AP, AP, np.ones((AP.n, AP.n)))
    out = optics.apply_mask(f, MASK)
    i0, ih = AP.index_of(0.0), AP.index_of(P.slit_sep / 2)
    assert abs(AP.x[ih] - P.slit_sep / 2) < AP.dx
    assert out.amp[i0, i0] == 0
    assert out.amp[ih, ih] == f.amp[ih, ih]


def test_aperture_grid_tiles_slits():
    # 16 cells per slit, cell midpoints strictly inside, symmetric layout
    t = MASK.transmission(AP.x)
    assert t.sum() == 2 * 16
    inside = AP.x[t > 0]
    assert np.isclose(inside[inside > 0].min() - AP.dx / 2, (P.slit_sep - P.slit_width) / 2)
    assert np.isclose(inside.max() + AP.dx / 2, (P.slit_sep + P.slit_width) / 2)
    assert AP.is_symmetric()


def test_uniform_field_area_fraction():
    f = ComplexField2D(AP, AP, np.ones((AP.n, AP.n)))
    kept = fields.norm2(optics.apply_mask(f, MASK)) / fields.norm2(f)
    width = AP.n * AP.dx
    assert kept == pytest.approx((2 * P.slit_width / width) ** 2, rel=1e-12)


def test_coarse_grid_rejected():
    g = Grid1D.centered(10.0, 64)
    f = ComplexField2D(g, g, np.ones((64, 64)))
    with pytest.raises(UnderResolvedSlit):
        optics.apply_mask(f, MASK)


@given(arrays(np.complex128, (AP.n, AP.n), elements=st.complex_numbers(max_magnitude=10, allow_nan=False)))
def test_mask_idempotent_and_contracting(amp):
    f = ComplexField2D(AP, AP, amp)
    once = optics.apply_mask(f, MASK)
    assert np.array_equal(optics.apply_mask(once, MASK).amp, once.amp)
    assert fields.norm2(once) <= fields.norm2(f)


def test_strong_correlation_suppresses_different_slits():
    p = ExperimentParams(sigma=P.slit_sep / 50, omega_big=10 * P.slit_sep, dist_source_slit=0.1)
    w = optics.case_weights(slit_field(p), optics.DoubleSlitMask.from_params(p), total=1.0)
    assert w.ratio < 1e-6


def test_product_state_slits_equiprobable():
    p = ExperimentParams(sigma=50.0, omega_big=50.0, dist_source_slit=0.1)
    w = optics.case_weights(slit_field(p), optics.DoubleSlitMask.from_params(p), total=1.0)
    assert w.p_diff == pytest.approx(w.p_same, rel=0.02)


@pytest.mark.parametrize("L", [0.1, 100.0])
def test_sum_rule(L):
    p = P.with_(dist_source_slit=L)
    w = optics.case_weights(slit_field(p), MASK, total=1.0)
    assert w.p_same + w.p_diff + w.p_blocked == pytest.approx(1.0, abs=1e-8)
    assert w.p_blocked >= 0


def test_sum_rule_without_total():
    w = optics.case_weights(slit_field(P), MASK)
    assert w.p_same + w.p_diff + w.p_blocked == pytest.approx(1.0, abs=1e-12)


def test_different_slit_weight_shrinks_with_sigma_when_correlated():
    p = P.with_(dist_source_slit=0.1)
    sigmas = [50.0, 5.0, 1.0, 0.5, 0.1]
    w = [optics.case_weights(slit_field(p.with_(sigma=s)), MASK, total=1.0) for s in sigmas]
    ratios = [c.ratio for c in w]
    assert all(b <= a for a, b in zip(ratios, ratios[1:]))
    # Absolute p_diff first grows from sigma = Omega to sigma = 5: the
    # normalised state concentrates near the diagonal faster than the
    # different-slit squares lose overlap.  Below that it falls.
    p_diff = [c.p_diff for c in w]
    assert p_diff[1] > p_diff[0]
    assert all(b <= a for a, b in zip(p_diff[1:], p_diff[2:]))


def test_rq_rectangles_cover_twice_the_slit_squares():
    for m in (16, 32):
        ap = optics.aperture_grid(P, m)
        f = ComplexField2D(ap, ap, np.ones((ap.n, ap.n)))
        exact, rq = optics.case_weights(f, MASK), optics.rq_case_weights(f, MASK)
        assert rq.p_same / exact.p_same == pytest.approx(2 + 2 / m, rel=1e-9)


def test_aperture_grid_warns_when_slits_cannot_be_tiled(caplog):
    p = ExperimentParams(slit_sep=1.0, slit_width=0.3)
    with caplog.at_level("WARNING"):
        optics.aperture_grid(p, 8)
    # 1 / 0.3 * m is whole for m = 9
    assert not caplog.records
    p = ExperimentParams(slit_sep=np.pi, slit_width=0.2)
    with caplog.at_level("WARNING"):
        optics.aperture_grid(p, 8)
    assert "quantised" in caplog.text
