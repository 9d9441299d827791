import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toralclt import kernels as K
from toralclt.errors import InvalidCoefficientsError, KernelScaleLimitError, UndefinedDefectError


def direct_kernel(points, weights, t):
    s = sum(w * np.exp(2j * np.pi * np.dot(p, t)) for p, w in zip(points, weights))
    return abs(s) ** 2 / sum(w * w for w in weights)


def test_constructors():
    assert len(K.square(5)) == 25 and K.square(5).is_indicator
    assert len(K.rectangle([2, 3, 4])) == 24
    assert len(K.triangle(4)) == 10
    assert len(K.triangle(3, d=3)) == 10
    assert K.gap(5).support() == {(0,), (1,), (4,), (9,), (16,)}
    e = K.dilated({"type": "ellipse", "axes": [1, 2]}, 20)
    assert abs(len(e) - math.pi * 20 * 40) / (math.pi * 800) < 0.02
    poly = K.dilated({"type": "polygon", "vertices": [[0, 0], [1, 0], [0, 1]]}, 30)
    assert len(poly) == 435  # centres strictly below the diagonal
    seq = K.from_json({"kind": "square", "side": 3, "dim": 1})
    assert seq.dim == 1 and len(seq) == 3
    with pytest.raises(ValueError):
        K.from_json({"kind": "spiral"})


def test_defects():
    assert K.folner_defect(K.square(10), (1, 0)) == pytest.approx(0.1)
    assert K.folner_defect(K.square(10), (0, 0)) == 0
    assert K.folner_defect(K.gap(100), (1,)) == pytest.approx(0.99)
    with pytest.raises(UndefinedDefectError):
        K.folner_defect(K.custom(np.zeros((0, 1)), np.zeros(0)), (1,))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 40), st.floats(-0.5, 0.5))
def test_fejer_matches_square_kernel(N, t):
    seq = K.square(N, d=1)
    assert float(K.kernel_eval(seq, t)) == pytest.approx(float(K.fejer_kernel(N, t)), rel=1e-9, abs=1e-12)


def test_kernel_eval_matches_direct_sum():
    rng = np.random.default_rng(0)
    seq = K.triangle(6)
    for _ in range(5):
        t = rng.random(2)
        assert K.kernel_eval(seq, t[None])[0] == pytest.approx(direct_kernel(seq.points, seq.weights, t))


def test_fejer_normalisation():
    for N in (3, 8, 17):
        t = (np.arange(40 * N) + 0.5) / (40 * N) - 0.5
        k = K.fejer_kernel(N, t)
        assert k.mean() == pytest.approx(1.0, rel=1e-12)
        assert (k ** 2).mean() == pytest.approx(K.fejer_l2_squared(N), rel=1e-12)
        assert K.jackson_kernel(N, t).mean() == pytest.approx(1.0, rel=1e-12)
    # product form in two dimensions
    t = np.array([[0.1, 0.3]])
    assert K.fejer_kernel((4, 5), t)[0] == pytest.approx(K.fejer_kernel(4, 0.1) * K.fejer_kernel(5, 0.3))


def test_jackson_moments():
    assert K.jackson_moment(16, 0) == pytest.approx(0.5, rel=1e-10)
    c, table = K.jackson_moment_constant()
    for (N, k), v in table.items():
        assert v <= c * N ** -k * (1 + 1e-12)
    assert c < 1.0


def test_exact_binomial_normalisation():
    p = K.ProbabilityVector([Fraction(1, 2), Fraction(1, 2)])
    for n in (0, 1, 5, 40):
        assert K.In_exact(p, n, exact=True) == Fraction(math.comb(2 * n, n), 4 ** n)
    n = 1000
    assert abs(math.sqrt(math.pi * n) * K.In_exact(p, n) - 1) < 2e-3


def test_multinomial_against_brute_force():
    p = K.ProbabilityVector(["1/3", "1/6", "1/2"])
    n = 7
    total = Fraction(0)
    for a in range(n + 1):
        for b in range(n + 1 - a):
            c = n - a - b
            m = Fraction(math.factorial(n), math.factorial(a) * math.factorial(b) * math.factorial(c))
            total += (m * Fraction(1, 3) ** a * Fraction(1, 6) ** b * Fraction(1, 2) ** c) ** 2
    assert K.In_exact(p, n, exact=True) == total
    w = K.barycenter_weights(p, n)
    assert sum(w.exact) == 1 and len(w) == math.comb(n + 2, 2)


def test_barycenter_kernel_moments():
    p = K.ProbabilityVector([0.5, 0.5])
    n = 400
    assert K.barycenter_kernel_moment(p, n, (0, 0)) == pytest.approx(1.0, abs=2e-3)
    # shifts off the simplex slice leave no overlap
    assert K.barycenter_kernel_moment(p, n, (1, 0)) == 0.0
    # shifts within the slice decay slowly
    assert 0.9 < K.barycenter_kernel_moment(p, n, (1, -1)) < 1.0


def test_probability_vector_errors():
    with pytest.raises(InvalidCoefficientsError):
        K.ProbabilityVector([0.5, 0.6])
    with pytest.raises(InvalidCoefficientsError):
        K.ProbabilityVector([1.0, 0.0])
    with pytest.raises(KernelScaleLimitError):
        K.In_exact(K.ProbabilityVector([0.25] * 4), 400)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6), st.floats(0.05, 0.95))
def test_quadratic_form_determinant(raw, mass):
    q = np.array(raw) / np.sum(raw) * mass
    Q = K.quadratic_form(q)
    assert Q.det == pytest.approx(np.linalg.det(Q.matrix), rel=1e-9, abs=1e-14)
    assert Q.min_eigenvalue() > 0
    t = np.linspace(-1, 1, len(q))
    assert Q(t) == pytest.approx(t @ Q.matrix @ t)


def test_quadratic_form_boundary_and_errors():
    Q = K.quadratic_form([0.25, 0.75])
    assert Q.det == 0.0
    assert Q.min_eigenvalue() == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InvalidCoefficientsError):
        K.quadratic_form([0.7, 0.7])
    with pytest.raises(InvalidCoefficientsError):
        K.quadratic_form([0.1, -0.1])


def test_neighb_F_second_order():
    q = np.array([0.2, 0.3, 0.1])
    Q = K.quadratic_form(q)
    t = np.array([0.3, -0.2, 0.5]) * 1e-3
    assert K.neighb_F(q, t) == pytest.approx(4 * math.pi ** 2 * Q(t), rel=1e-4)
    assert K.neighb_F(q, np.zeros(3)) == pytest.approx(0.0, abs=1e-15)
