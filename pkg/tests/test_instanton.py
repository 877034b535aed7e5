import numpy as np
import pytest

from gluecount.instanton import (
    Bubble,
    TwoPointConfig,
    curvature,
    direction_ratio,
    magnitude,
    regular_gauge_curvature,
)
from gluecount.linalg3 import batched_singular_values
from gluecount.rotations import quat_normalize, quat_to_rotation, sample_rotation


def test_curvature_unit_example():
    bub = Bubble(np.zeros(4), 1.0, np.eye(3))
    out = curvature(bub, np.array([1.0, 0.0, 0.0, 0.0]))
    assert np.max(np.abs(out - 0.25 * np.eye(3))) < 1e-15


def test_curvature_is_positive_multiple_of_rotation():
    rng = np.random.default_rng(0)
    for _ in range(100):
        bub = Bubble(rng.uniform(-1, 1, 4), float(rng.uniform(0.1, 2.0)), sample_rotation(rng))
        x = rng.uniform(-2, 2, 4)
        if np.linalg.norm(x - bub.center) < 1e-3:
            continue
        sv = batched_singular_values(curvature(bub, x))
        expected = magnitude(bub, x)
        assert np.max(np.abs(sv - expected)) <= 1e-12 * expected


def test_curvature_center_singularity():
    bub = Bubble(np.zeros(4), 1.0, np.eye(3))
    with pytest.raises(ValueError):
        curvature(bub, np.zeros(4))


def test_gluing_angle_equivariance():
    # angle m composes as exactly m^T times the identity-angle matrix
    rng = np.random.default_rng(1)
    m = sample_rotation(rng)
    center = rng.uniform(-1, 1, 4)
    x = rng.uniform(-1, 1, 4)
    with_angle = curvature(Bubble(center, 0.7, m), x)
    plain = curvature(Bubble(center, 0.7, np.eye(3)), x)
    assert np.max(np.abs(with_angle - m.T @ plain)) < 1e-15


def test_regular_gauge_relation():
    # exterior gauge at center 0 with identity angle = R(x/|x|) @ regular gauge
    rng = np.random.default_rng(2)
    for _ in range(50):
        x = rng.uniform(-2, 2, 4)
        lam = float(rng.uniform(0.2, 1.5))
        ext = curvature(Bubble(np.zeros(4), lam, np.eye(3)), x)
        reg = regular_gauge_curvature(lam, np.zeros(4), x)
        assert np.max(np.abs(ext - quat_to_rotation(quat_normalize(x)) @ reg)) < 1e-13


def test_regular_gauge_example():
    x = np.array([0.3, -0.2, 0.5, 0.1])
    out = regular_gauge_curvature(1.0, np.zeros(4), x)
    assert np.max(np.abs(out - np.eye(3) / (1.0 + x @ x) ** 2)) < 1e-15


def test_magnitude_values():
    bub = Bubble(np.array([0.5, 0.0, 0.0, 0.0]), 2.0, np.eye(3))
    assert abs(magnitude(bub, bub.center) - 1.0 / 4.0) < 1e-15  # scale**-2
    bub1 = Bubble(np.zeros(4), 1.0, np.eye(3))
    assert abs(magnitude(bub1, np.array([0.0, 1.0, 0.0, 0.0])) - 0.25) < 1e-15


def test_magnitude_maximized_at_scale_equal_distance():
    # at fixed distance r the magnitude peaks at scale r with value 1/(4 r^2)
    r = 0.73
    x = np.array([r, 0.0, 0.0, 0.0])
    scales = np.linspace(0.1, 2.0, 400)
    values = [magnitude(Bubble(np.zeros(4), s, np.eye(3)), x) for s in scales]
    best = int(np.argmax(values))
    assert abs(scales[best] - r) < 0.01
    assert abs(values[best] - 1.0 / (4.0 * r * r)) < 1e-4


def test_direction_ratio_midpoint():
    cfg = TwoPointConfig(0.1)
    assert np.max(np.abs(direction_ratio(cfg, np.zeros(4)) - np.array([-1.0, 0, 0, 0]))) < 1e-15


def test_direction_ratio_unit_norm():
    cfg = TwoPointConfig(0.25)
    rng = np.random.default_rng(3)
    y = rng.uniform(-2, 2, (500, 4))
    norms = np.linalg.norm(direction_ratio(cfg, y), axis=-1)
    assert np.max(np.abs(norms - 1.0)) < 1e-12


def test_direction_ratio_errors_at_marked_points():
    cfg = TwoPointConfig(0.1)
    with pytest.raises(ValueError):
        direction_ratio(cfg, cfg.p)
    with pytest.raises(ValueError):
        direction_ratio(cfg, cfg.q + np.array([1e-14, 0, 0, 0]))


def _near_remainder(cfg, rho, direction):
    y_i = direction * rho * cfg.L
    g = direction_ratio(cfg, np.concatenate([[0.0], y_i]))
    approx = np.concatenate([[-1.0], -2.0 * y_i / cfg.L])
    return float(np.linalg.norm(g - approx))


def _far_remainder(cfg, eps, direction):
    y_i = direction * cfg.L / eps
    g = direction_ratio(cfg, np.concatenate([[0.0], y_i]))
    approx = np.concatenate([[1.0], -2.0 * cfg.L * y_i / float(y_i @ y_i)])
    return float(np.linalg.norm(g - approx))


@pytest.mark.parametrize("which", ["near", "far"])
def test_direction_ratio_asymptotics(which):
    cfg = TwoPointConfig(0.1)
    rng = np.random.default_rng(4)
    fn = _near_remainder if which == "near" else _far_remainder
    ratios = (1e-1, 1e-2, 1e-3)
    for _ in range(10):
        d = rng.standard_normal(3)
        d /= np.linalg.norm(d)
        rem = [fn(cfg, r, d) for r in ratios]
        constants = [rem[k] / ratios[k] ** 2 for k in range(3)]
        # quadratic remainder: fitted constant stable within a factor 2
        assert max(constants) <= 2.0 * min(constants)
        slope = np.polyfit(np.log(ratios), np.log(rem), 1)[0]
        assert abs(slope - 2.0) < 0.1


def test_two_point_config_invariants():
    cfg = TwoPointConfig(0.3)
    assert np.array_equal(cfg.p, [0.3, 0, 0, 0])
    assert np.array_equal(cfg.q, [-0.3, 0, 0, 0])
    with pytest.raises(ValueError):
        TwoPointConfig(0.0)


def test_bubble_validation():
    with pytest.raises(ValueError):
        Bubble(np.zeros(4), 0.0, np.eye(3))
    with pytest.raises(ValueError):
        Bubble(np.array([np.inf, 0, 0, 0]), 1.0, np.eye(3))
