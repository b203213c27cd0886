import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eneat.haralick import (
    DegenerateSegmentError,
    FeatureScaler,
    SegmentPixels,
    apply_scaler,
    fit_scaler,
    glcm,
    haralick13,
    quantize,
    segment_features,
)


def brute_haralick(P):
    """Cell-by-cell Haralick features (0-based gray levels)."""
    n = len(P)
    px = [sum(P[i][j] for j in range(n)) for i in range(n)]
    py = [sum(P[i][j] for i in range(n)) for j in range(n)]
    mux = sum(i * px[i] for i in range(n))
    muy = sum(j * py[j] for j in range(n))
    sx = math.sqrt(sum((i - mux) ** 2 * px[i] for i in range(n)))
    sy = math.sqrt(sum((j - muy) ** 2 * py[j] for j in range(n)))
    psum = [0.0] * (2 * n - 1)
    pdiff = [0.0] * n
    for i in range(n):
        for j in range(n):
            psum[i + j] += P[i][j]
            pdiff[abs(i - j)] += P[i][j]

    def h(values):
        return -sum(v * math.log(v) for v in values if v > 0)

    f1 = sum(P[i][j] ** 2 for i in range(n) for j in range(n))
    f2 = sum(k * k * pdiff[k] for k in range(n))
    cov = sum(i * j * P[i][j] for i in range(n) for j in range(n)) - mux * muy
    f3 = cov / (sx * sy) if sx * sy >= 1e-12 else 0.0
    f4 = sum((i - mux) ** 2 * P[i][j] for i in range(n) for j in range(n))
    f5 = sum(P[i][j] / (1 + (i - j) ** 2) for i in range(n) for j in range(n))
    f6 = sum(k * psum[k] for k in range(2 * n - 1))
    f7 = sum((k - f6) ** 2 * psum[k] for k in range(2 * n - 1))
    f8 = h(psum)
    f9 = h([P[i][j] for i in range(n) for j in range(n)])
    dmean = sum(k * pdiff[k] for k in range(n))
    f10 = sum((k - dmean) ** 2 * pdiff[k] for k in range(n))
    f11 = h(pdiff)
    hx, hy = h(px), h(py)
    hxy1 = -sum(P[i][j] * math.log(px[i] * py[j])
                for i in range(n) for j in range(n) if px[i] * py[j] > 0)
    hxy2 = h([px[i] * py[j] for i in range(n) for j in range(n)])
    f12 = (f9 - hxy1) / max(hx, hy) if max(hx, hy) >= 1e-12 else 0.0
    f13 = math.sqrt(max(0.0, 1 - math.exp(-2 * (hxy2 - f9))))
    return [f1, f2, f3, f4, f5, f6, f7, f8, f9, f10, f11, f12, f13]


def random_glcm(rng, n):
    m = rng.random((n, n)) * (rng.random((n, n)) < 0.6)
    m[0, 0] += 1e-3
    m = m + m.T
    return m / m.sum()


def square_segment(values, sid=1, **bands):
    values = np.asarray(values, dtype=float)
    r, c = np.indices(values.shape)
    bands = bands or {"b4": values.ravel()}
    return SegmentPixels(sid, r.ravel(), c.ravel(), bands)


def test_quantize_examples():
    seg = square_segment([[5, 5], [5, 5]])
    assert list(quantize(seg, "b4", 16)) == [0, 0, 0, 0]
    seg = square_segment([[0, 255]])
    assert list(quantize(seg, "b4", 2)) == [0, 1]
    seg = square_segment([[0, 100, 200]])
    assert list(quantize(seg, "b4", 4)) == [0, 2, 3]
    with pytest.raises(KeyError):
        quantize(seg, "b6", 4)


def test_glcm_two_by_two():
    q = np.array([0, 1, 0, 1])
    rows = np.array([0, 0, 1, 1])
    cols = np.array([0, 1, 0, 1])
    p = glcm(rows, cols, q, 2, [(0, 1)])
    np.testing.assert_allclose(p, [[0, 0.5], [0.5, 0]], atol=1e-15)


def test_glcm_constant_and_isolated():
    p = glcm([0, 0, 1], [0, 1, 0], [0, 0, 0], 4)
    assert p[0, 0] == 1.0 and p.sum() == 1.0
    with pytest.raises(DegenerateSegmentError):
        glcm([0, 5], [0, 5], [0, 1], 2)


def test_glcm_only_counts_pairs_inside_segment():
    # L-shaped segment: (0,0),(0,1),(1,0). Horizontal pair only (0,0)-(0,1).
    p = glcm([0, 0, 1], [0, 1, 0], [0, 1, 1], 2, [(0, 1)])
    np.testing.assert_allclose(p, [[0, 0.5], [0.5, 0]])


def test_haralick_checkerboard_hand_values():
    f = haralick13(np.array([[0.0, 0.5], [0.5, 0.0]]))
    assert abs(f[0] - 0.5) <= 1e-12
    assert abs(f[1] - 1.0) <= 1e-12
    assert abs(f[8] - math.log(2)) <= 1e-12


def test_haralick_constant_segment():
    p = np.zeros((16, 16))
    p[0, 0] = 1.0
    f = haralick13(p)
    assert f[0] == 1.0 and f[1] == 0.0 and f[8] == 0.0
    assert f[2] == 0.0 and f[11] == 0.0
    assert np.all(np.isfinite(f))


def test_haralick_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(64):
        p = random_glcm(rng, int(rng.integers(2, 9)))
        np.testing.assert_allclose(haralick13(p), brute_haralick(p.tolist()), atol=1e-9, rtol=0)


def test_haralick_finite_on_random_matrices():
    rng = np.random.default_rng(1)
    for _ in range(1000):
        assert np.all(np.isfinite(haralick13(random_glcm(rng, int(rng.integers(2, 17))))))


coords = st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=4, max_size=30, unique=True)


def _segment_from(coords_list, values, shift=(0, 0), add=0):
    rows = np.array([r for r, _ in coords_list]) + shift[0]
    cols = np.array([c for _, c in coords_list]) + shift[1]
    return SegmentPixels(1, rows, cols, {"b4": np.asarray(values, dtype=float) + add})


@settings(max_examples=60, deadline=None)
@given(coords, st.data())
def test_glcm_symmetric_unit_mass_and_invariances(cs, data):
    values = data.draw(st.lists(st.integers(0, 4000), min_size=len(cs), max_size=len(cs)))
    base = _segment_from(cs, values)
    try:
        f0 = segment_features(base, ["b4"])
    except DegenerateSegmentError:
        return
    q = quantize(base, "b4", 16)
    p = glcm(base.rows, base.cols, q, 16)
    np.testing.assert_array_equal(p, p.T)
    assert abs(p.sum() - 1.0) <= 1e-12
    shift = (data.draw(st.integers(-50, 50)), data.draw(st.integers(-50, 50)))
    np.testing.assert_array_equal(segment_features(_segment_from(cs, values, shift=shift), ["b4"]), f0)
    add = data.draw(st.integers(-1000, 1000))
    np.testing.assert_array_equal(segment_features(_segment_from(cs, values, add=add), ["b4"]), f0)


def test_segment_features_lengths():
    vals = np.arange(16.0).reshape(4, 4) % 5
    seg = square_segment(vals, b4=vals.ravel(), b6=vals.ravel())
    two = segment_features(seg)
    assert two.shape == (26,)
    np.testing.assert_array_equal(two[:13], two[13:])
    assert segment_features(seg, ["b6"]).shape == (13,)


def test_scaler_examples():
    sc = fit_scaler([[2.0, 7.0], [4.0, 7.0]])
    np.testing.assert_allclose(apply_scaler(sc, [3.0, 7.0]), [0.5, 0.0])
    np.testing.assert_allclose(apply_scaler(sc, [1.0, 100.0]), [0.0, 0.0])
    np.testing.assert_allclose(apply_scaler(sc, [9.0, -3.0]), [1.0, 0.0])
    with pytest.raises(ValueError):
        apply_scaler(sc, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        FeatureScaler(np.array([1.0]), np.array([0.0]))
