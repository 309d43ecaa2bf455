import numpy as np

from fixbed.continuation import ContinuationOptions, plac_trace
from fixbed.newton import NewtonOptions


def circle_callbacks():
    def F(w, p):
        return np.array([w[0] ** 2 + p**2 - 1.0])

    def J(w, p):
        return np.array([[2.0 * w[0]]])

    def dFdp(w, p):
        return np.array([2.0 * p])

    return F, J, dFdp


def test_circle_trace_through_both_turning_points():
    F, J, dFdp = circle_callbacks()
    br = plac_trace(F, J, dFdp, np.array([0.0]), 1.0,
                    ContinuationOptions(ds0=0.08, ds_min=1e-6, ds_max=0.12,
                                        p_range=(-2.0, 2.0), max_points=140),
                    NewtonOptions(tol=1e-12, max_iter=20))
    # every point sits on the circle
    resid = br.W[:, 0] ** 2 + br.p**2 - 1.0
    assert np.max(np.abs(resid)) < 1e-8
    # the branch covers the full circle through both folds
    assert br.p.min() < -0.999 and br.p.max() > 0.999
    assert br.W[:, 0].min() < -0.998 and br.W[:, 0].max() > 0.998
    # detected turning points sit at p = +-1
    assert br.turning_indices.size >= 1
    for i in br.turning_indices:
        assert abs(abs(br.p[i]) - 1.0) < 5e-3


def test_circle_consecutive_distance_bounded():
    F, J, dFdp = circle_callbacks()
    opts = ContinuationOptions(ds0=0.05, ds_min=1e-6, ds_max=0.1,
                               p_range=(-2.0, 2.0), max_points=80)
    br = plac_trace(F, J, dFdp, np.array([0.0]), 1.0, opts,
                    NewtonOptions(tol=1e-12, max_iter=20))
    dw = np.diff(br.W[:, 0])
    dp = np.diff(br.p)
    dist = np.hypot(dw, dp)
    assert np.all(dist[1:] <= opts.ds_max * 1.6)  # corrector may overshoot mildly


def test_linear_branch_constant_tangent():
    def F(w, p):
        return np.array([w[0] - p])

    def J(w, p):
        return np.array([[1.0]])

    def dFdp(w, p):
        return np.array([-1.0])

    br = plac_trace(F, J, dFdp, np.array([0.3]), 0.3,
                    ContinuationOptions(ds0=0.1, ds_min=1e-6, ds_max=0.2,
                                        p_range=(0.0, 2.0), max_points=100),
                    NewtonOptions(tol=1e-13, max_iter=10))
    np.testing.assert_allclose(br.W[:, 0], br.p, atol=1e-12)
    steps = np.diff(br.p)
    # diagonal branch: p grows monotonically, no turning points
    assert np.all(steps > 0)
    assert br.turning_indices.size == 0
    assert br.p[-1] >= 2.0


def test_branch_points_satisfy_residual_tolerance():
    F, J, dFdp = circle_callbacks()
    br = plac_trace(F, J, dFdp, np.array([0.0]), 1.0,
                    ContinuationOptions(ds0=0.05, ds_min=1e-6, ds_max=0.1,
                                        p_range=(-2.0, 2.0), max_points=60),
                    NewtonOptions(tol=1e-10, max_iter=20))
    for w, p in zip(br.W, br.p):
        assert abs(F(w, p)[0]) <= 1e-10 * 10
