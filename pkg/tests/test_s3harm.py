import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strayfield import s3harm as S
from strayfield.s3harm import MultiIndex, S3Point


def test_multi_index_validation():
    MultiIndex(3, 2, -2)
    for bad in ((1, 2, 0), (2, 1, 2), (-1, 0, 0)):
        with pytest.raises(ValueError):
            MultiIndex(*bad)


def test_ordering_is_lexicographic():
    idx = S.indices_up_to(4)
    assert idx == sorted(idx)
    assert [tuple(a) for a in idx[:5]] == [(0, 0, 0), (1, 0, 0), (1, 1, -1), (1, 1, 0), (1, 1, 1)]
    assert all(a.position == i for i, a in enumerate(idx))


@pytest.mark.parametrize("k", range(21))
def test_counting(k):
    assert len(S.degree_indices(k)) == (k + 1) ** 2
    assert len(S.indices_up_to(k)) == (k + 1) * (k + 2) * (2 * k + 3) // 6 == S.count_up_to(k)


def test_a_norm():
    assert S.a_norm(0, 0) == pytest.approx(math.pi / 2)
    assert S.a_norm(1, 0) == pytest.approx(2 * math.pi)
    assert S.a_norm(2, 2) == pytest.approx(180 * math.pi)
    with pytest.raises(ValueError):
        S.a_norm(1, 2)
    for k in range(0, 30, 3):
        for l in range(k + 1):
            exact = (k + 1) * math.pi / 2 * math.factorial(k + l + 1) / math.factorial(k - l)
            assert S.a_norm(k, l) == pytest.approx(exact, rel=1e-13)
            assert math.exp(S.log_a_norm(k, l)) == pytest.approx(exact, rel=1e-12)


def test_a_norm_large_degree_is_finite():
    assert math.isfinite(S.a_norm(150, 70))


def test_s3point_representations_agree():
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        p = S3Point.from_cartesian(v)
        q = S3Point.from_angles(p.phi, p.theta, p.chi)
        assert np.allclose(q.xi, v, atol=1e-12)
        assert 0 <= p.phi < 2 * math.pi and 0 <= p.theta <= math.pi and 0 <= p.chi <= math.pi
    with pytest.raises(ValueError):
        S3Point.from_cartesian((1.0, 0.0, 0.0, 0.1))


def test_y_alpha_examples():
    for p in (S3Point.from_angles(0.1, 0.2, 0.3), S3Point.from_angles(5.0, 3.0, 2.0)):
        assert S.y_alpha((0, 0, 0), p) == pytest.approx(1 / (math.sqrt(2) * math.pi), rel=1e-15)
    # a_{1,1} = 6 pi, T_2'' = 4, Y_{1,0}(., 0) = sqrt(3/(4 pi))
    p = S3Point.from_angles(0.0, 0.0, math.pi / 2)
    assert S.y_alpha((1, 1, 0), p) == pytest.approx(4 / math.sqrt(6 * math.pi) * math.sqrt(3 / (4 * math.pi)), rel=1e-14)
    for k in range(1, 6):
        assert S.y_alpha((k, k, 0), S3Point.from_angles(0.3, 0.4, 0.0)) == 0.0


def test_y_alpha_against_mpmath():
    # 40-digit mpmath evaluation of the closed form
    p = S3Point.from_angles(0.3, 0.7, 1.1)
    assert S.y_alpha((6, 3, -2), p) == pytest.approx(-0.07672540376983204718, rel=1e-12)
    assert S.y_alpha((12, 5, 4), p) == pytest.approx(0.066321512493124571449, rel=1e-12)


def test_y_alpha_large_degree_near_pole_is_finite():
    for chi in (1e-200, math.pi - 1e-12):
        v = S.y_alpha((60, 55, 3), S3Point.from_angles(0.2, 0.5, chi))
        assert math.isfinite(v)


def test_orthonormality_s3():
    from strayfield.validation import s3_gram

    g = s3_gram(6)
    assert np.max(np.abs(g - np.eye(g.shape[0]))) < 1e-9


def test_angular_derivatives_examples():
    assert S.y_alpha_angular_derivatives((0, 0, 0), S3Point.from_angles(0.4, 1.0, 2.0)) == (0.0, 0.0, 0.0)
    p = S3Point.from_angles(0.4, 1.0, 2.0)
    h = 1e-5
    fd = (S.y_alpha((1, 0, 0), S3Point.from_angles(0.4, 1.0, 2.0 + h))
          - S.y_alpha((1, 0, 0), S3Point.from_angles(0.4, 1.0, 2.0 - h))) / (2 * h)
    assert S.y_alpha_angular_derivatives((1, 0, 0), p)[2] == pytest.approx(fd, rel=1e-6)
    for chi in (0.0, 1.0, math.pi):
        vals = S.y_alpha_angular_derivatives((2, 1, 1), S3Point.from_angles(0.3, 0.0, chi))
        assert all(math.isfinite(v) for v in vals)


def _fd_angles(alpha, phi, theta, chi, h=1e-5):
    f = lambda a, b, c: float(S.y_alpha_angles(alpha, a, b, c))  # noqa: E731
    return (
        (f(phi + h, theta, chi) - f(phi - h, theta, chi)) / (2 * h),
        (f(phi, theta + h, chi) - f(phi, theta - h, chi)) / (2 * h),
        (f(phi, theta, chi + h) - f(phi, theta, chi - h)) / (2 * h),
    )


@settings(max_examples=80, deadline=None)
@given(
    k=st.integers(0, 6),
    data=st.data(),
    phi=st.floats(0, 2 * math.pi),
    theta=st.floats(0.1, math.pi - 0.1),
    chi=st.floats(0.1, math.pi - 0.1),
)
def test_angular_derivatives_fd(k, data, phi, theta, chi):
    l = data.draw(st.integers(0, k))
    m = data.draw(st.integers(-l, l))
    dphi, dtheta, dchi = S.angular_derivatives_angles((k, l, m), phi, theta, chi)
    fphi, ftheta, fchi = _fd_angles((k, l, m), phi, theta, chi)
    scale = max(1.0, abs(fphi), abs(ftheta), abs(fchi))
    # dphi and dtheta come divided by sin(theta) sin(chi) and sin(chi)
    assert float(dphi) * math.sin(theta) * math.sin(chi) == pytest.approx(fphi, abs=1e-6 * scale)
    assert float(dtheta) * math.sin(chi) == pytest.approx(ftheta, abs=1e-6 * scale)
    assert float(dchi) == pytest.approx(fchi, abs=1e-6 * scale)


def _laplace_beltrami_fd(alpha, phi, theta, chi, h=1e-3):
    """Coordinate form of the S^3 Laplace-Beltrami operator by central differences."""
    f = lambda a, b, c: float(S.y_alpha_angles(alpha, a, b, c))  # noqa: E731
    f0 = f(phi, theta, chi)
    sc, st_ = math.sin(chi), math.sin(theta)
    d_chi = (f(phi, theta, chi + h) - f(phi, theta, chi - h)) / (2 * h)
    dd_chi = (f(phi, theta, chi + h) - 2 * f0 + f(phi, theta, chi - h)) / h**2
    d_th = (f(phi, theta + h, chi) - f(phi, theta - h, chi)) / (2 * h)
    dd_th = (f(phi, theta + h, chi) - 2 * f0 + f(phi, theta - h, chi)) / h**2
    dd_ph = (f(phi + h, theta, chi) - 2 * f0 + f(phi - h, theta, chi)) / h**2
    lap = dd_chi + 2 * math.cos(chi) / sc * d_chi
    lap += (dd_th + math.cos(theta) / st_ * d_th) / sc**2
    lap += dd_ph / (sc * st_) ** 2
    return f0, lap


def test_laplace_beltrami_eigen_relation():
    rng = np.random.default_rng(11)
    for alpha in S.indices_up_to(4):
        for _ in range(50):
            phi, theta, chi = rng.uniform(0, 2 * math.pi), rng.uniform(0.3, 2.8), rng.uniform(0.3, 2.8)
            f0, lap = _laplace_beltrami_fd(alpha, phi, theta, chi)
            if abs(f0) < 1e-2:
                continue
            assert -lap == pytest.approx(alpha.k * (alpha.k + 2) * f0, rel=1e-4, abs=1e-6)
