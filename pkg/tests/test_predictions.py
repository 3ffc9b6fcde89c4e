import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from wignerlab.exceptions import ValidationError
from wignerlab.observables import Observable, bump
from wignerlab.predictions import (
    predicted_statistic,
    sine_kernel,
    sine_kernel_determinant,
    sine_kernel_determinants,
)


def _gauss_grid_oracle(O, n):
    """Tensor Gauss-Legendre rule on the support box, independent of the adaptive code."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    axes, ws = [], []
    for lo, hi in O.support_box:
        axes.append(0.5 * (hi - lo) * nodes + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * weights)
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack(grids, axis=-1).reshape(-1, O.k)
    w = np.ones(1)
    for wj in ws:
        w = np.multiply.outer(w, wj)
    vals = O(pts)
    if O.k > 1:
        # explicit k x k sine-kernel matrix, determinant via eigenvalues
        d = pts[:, :, None] - pts[:, None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            K = np.where(d == 0, 1.0, np.sin(np.pi * d) / (np.pi * d))
        vals = vals * np.prod(np.linalg.eigvalsh(K), axis=-1)
    return float(np.sum(w.ravel() * vals))


def test_kernel_values():
    assert sine_kernel(0.0) == 1.0
    assert abs(sine_kernel(1.0)) <= 1e-15
    assert sine_kernel(0.5) == pytest.approx(2 / math.pi, rel=1e-15)
    assert sine_kernel(0.5) == pytest.approx(0.63662, abs=1e-5)
    x = np.array([1e-7, -5e-7, 2e-6])
    np.testing.assert_allclose(sine_kernel(x), np.sin(np.pi * x) / (np.pi * x), rtol=1e-14)


def test_determinant_examples():
    assert sine_kernel_determinant([0.3]) == 1.0
    assert sine_kernel_determinant([0.0, 0.0]) == pytest.approx(0.0, abs=1e-12)
    assert sine_kernel_determinant([0.0, 0.5]) == pytest.approx(1 - (2 / math.pi) ** 2, abs=1e-14)
    assert sine_kernel_determinant([0.0, 0.5]) == pytest.approx(0.59472, abs=1e-5)
    assert sine_kernel_determinant([0.0, 1.0]) == pytest.approx(1.0, abs=1e-14)
    assert sine_kernel_determinant([0.0, 1.0, 2.0]) == pytest.approx(1.0, abs=1e-14)


def test_determinant_far_apart():
    assert abs(sine_kernel_determinant([0.0, 50.3]) - 1) <= 1e-3
    assert abs(sine_kernel_determinant([-60.2, 0.0, 55.7]) - 1) <= 1e-3


def test_determinant_rejects_bad_input():
    with pytest.raises(ValidationError):
        sine_kernel_determinant([])
    with pytest.raises(ValidationError):
        sine_kernel_determinant([[0.0, 1.0]])


points = st.lists(st.floats(-20, 20, allow_nan=False), min_size=1, max_size=5)


@settings(max_examples=200, deadline=None)
@given(points)
def test_determinant_in_unit_interval(a):
    d = sine_kernel_determinant(a)
    assert -1e-12 <= d <= 1 + 1e-12


@settings(max_examples=200, deadline=None)
@given(points, st.randoms(use_true_random=False), st.floats(-10, 10))
def test_determinant_invariances(a, rnd, t):
    d = sine_kernel_determinant(a)
    b = list(a)
    rnd.shuffle(b)
    assert sine_kernel_determinant(b) == pytest.approx(d, abs=1e-12)
    # translation only perturbs differences at the rounding level of the shift
    assert sine_kernel_determinant(np.asarray(a) + t) == pytest.approx(d, abs=1e-12 + 1e-13 * abs(t))


def test_batched_matches_single():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-3, 3, (50, 3))
    batch = sine_kernel_determinants(pts)
    assert np.array_equal(batch, [sine_kernel_determinant(p) for p in pts])


def test_k1_prediction_is_integral_of_observable():
    for w in (1.0, 3.0):
        O = Observable.product_bump(1, 0.4, w, 0.8)
        ref, _ = integrate.quad(lambda x: 0.8 * bump((x - 0.4) / w), 0.4 - w, 0.4 + w, epsabs=1e-13, limit=200)
        p = predicted_statistic(O)
        assert p.value == pytest.approx(ref, abs=1e-9)
        assert p.error <= 1e-8
    assert predicted_statistic(Observable.product_bump(1)).value == pytest.approx(3.620700967313623, abs=1e-9)


def test_k2_prediction_against_grid_oracle():
    O = Observable.product_bump(2, half_width=3.0)
    p = predicted_statistic(O)
    ref = _gauss_grid_oracle(O, 400)
    assert p.value == pytest.approx(ref, abs=1e-7)
    assert p.value == pytest.approx(10.37016947794196, abs=1e-7)
    assert p.error <= 1e-8


def test_k2_prediction_below_product_of_marginals():
    # 1 - K^2 <= 1 so the pair integral sits below the squared one-point integral
    O = Observable.product_bump(2, half_width=2.0)
    single = predicted_statistic(Observable.product_bump(1, half_width=2.0)).value
    assert 0 < predicted_statistic(O).value < single**2


def test_k2_far_separated_factorizes():
    O = Observable((0.0, 50.0), (3.0, 3.0))
    p = predicted_statistic(O).value
    single = predicted_statistic(Observable.product_bump(1)).value
    assert p == pytest.approx(single**2, rel=1e-2)


def test_k3_prediction_against_grid_oracle():
    O = Observable.product_bump(3, half_width=1.5)
    t0 = time.perf_counter()
    p = predicted_statistic(O)
    elapsed = time.perf_counter() - t0
    ref = _gauss_grid_oracle(O, 80)
    assert p.value == pytest.approx(ref, abs=1e-5)
    assert p.error <= 1e-6
    assert elapsed < 60


def test_zero_amplitude_gives_zero():
    for k in (1, 2):
        assert predicted_statistic(Observable.product_bump(k, amplitude=0.0)).value == 0.0


def test_negative_amplitude_flips_sign():
    pos = predicted_statistic(Observable.product_bump(2, half_width=1.0)).value
    neg = predicted_statistic(Observable.product_bump(2, half_width=1.0, amplitude=-1.0)).value
    assert neg == pytest.approx(-pos, abs=1e-12)


def test_order_checks():
    with pytest.raises(ValidationError):
        predicted_statistic(Observable.product_bump(2), k=3)
    with pytest.raises(ValidationError):
        predicted_statistic(Observable.product_bump(4))
