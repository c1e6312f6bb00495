import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from conftest import channel, data, harvest
from model.timeline import build_timeline
from solvers.newton import NewtonConfig, minimize, newton_direction
from solvers.objective import Derivatives, evaluate, make_problem
from utils.errors import NonFiniteObjective, SingularHessian
from utils.trace import TraceRecorder


def test_direction_solves_spd_system():
    hess = np.array([[4.0, 1.0], [1.0, 3.0]])
    grad = np.array([1.0, 2.0])
    delta, tau = newton_direction(hess, grad, 1e-10)
    assert tau == 0.0
    np.testing.assert_allclose(hess @ delta, grad)


def test_direction_regularizes_singular_hessian():
    hess = np.array([[1.0, 0.0], [0.0, 0.0]])
    delta, tau = newton_direction(hess, np.array([2.0, 0.0]), 1e-10)
    assert tau > 0
    np.testing.assert_allclose(delta, [2.0, 0.0], rtol=1e-8)


def test_direction_warns_when_levenberg_escalates(caplog):
    delta, tau = newton_direction(np.array([[-1.0]]), np.array([1.0]), 1e-10)
    assert tau > 1.0
    np.testing.assert_allclose(delta, [1.0 / (tau - 1.0)])
    assert any(rec.levelname == "WARNING" and "escalated" in rec.getMessage() for rec in caplog.records)


def test_first_regularization_is_quiet(caplog):
    newton_direction(np.array([[1.0, 0.0], [0.0, 0.0]]), np.array([2.0, 0.0]), 1e-10)
    assert not [rec for rec in caplog.records if rec.levelname == "WARNING"]


def test_direction_gives_up_on_non_finite_hessian():
    with pytest.raises(SingularHessian):
        newton_direction(np.array([[-np.inf]]), np.array([1.0]), 1e-10)


def test_single_epoch_penalty_minimizer(single_epoch_tl):
    pp = make_problem(single_epoch_tl, 1.0, mu=1e6)
    out = minimize(pp, [1.5])
    assert out.converged
    assert out.r[0] == pytest.approx(1.0, abs=1e-3)
    golden = minimize_scalar(
        lambda x: evaluate(pp, [x], 0).value, bounds=(0.5, 1.5), method="bounded", options={"xatol": 1e-12}
    )
    assert out.r[0] == pytest.approx(golden.x, abs=1e-6)


def test_descent_is_monotone(two_epoch_tl):
    pp = make_problem(two_epoch_tl, 2.0, mu=1e3)
    trace = TraceRecorder()
    r0 = np.array([0.2, 1.7])
    out = minimize(pp, r0, trace=trace)
    values = [evaluate(pp, r0, 0).value] + [row["F"] for row in trace.phase("newton")]
    assert all(b <= a + 1e-12 * max(1.0, abs(a)) for a, b in zip(values, values[1:]))
    assert out.value <= values[0]
    assert len(trace.phase("newton")) == out.steps


class _Quadratic:
    """F(r) = 0.5 (r - center)' A (r - center) + floor."""

    def __init__(self, A, center, floor=0.0):
        self.A = np.asarray(A, float)
        self.center = np.asarray(center, float)
        self.floor = floor

    def evaluate(self, r, order=2):
        d = np.asarray(r, float) - self.center
        value = 0.5 * float(d @ self.A @ d) + self.floor
        return Derivatives(value=value, grad=self.A @ d, hess=self.A if order >= 2 else None,
                           objective=value, penalty=0.0)


@pytest.mark.parametrize("r0", [-10.0, 0.0, 2.5, 3.0 + 1e-3, 40.0])
def test_shifted_parabola_takes_one_full_step(r0):
    # (r - 3)^2 + 7
    out = minimize(_Quadratic([[2.0]], [3.0], floor=7.0), [r0])
    assert out.converged
    assert out.steps == 1
    assert out.r[0] == pytest.approx(3.0, abs=1e-12)
    assert out.value == pytest.approx(7.0, abs=1e-12)


def test_decrement_bounds_suboptimality_on_quadratics(rng):
    for _ in range(50):
        M = rng.normal(size=(4, 4))
        A = M @ M.T + 0.1 * np.eye(4)
        quad = _Quadratic(A, rng.normal(size=4), floor=float(rng.normal()))
        d = quad.evaluate(rng.normal(scale=3.0, size=4))
        delta, tau = newton_direction(d.hess, d.grad, 1e-10)
        assert tau == 0.0
        lam_sq = float(d.grad @ delta)
        gap = d.value - quad.floor
        assert lam_sq / 2.0 >= gap - 1e-9 * max(1.0, gap)


def test_max_steps_returns_unconverged(two_epoch_tl):
    pp = make_problem(two_epoch_tl, 2.0, mu=1e8)
    out = minimize(pp, [3.0, 0.0], NewtonConfig(eps_newton=1e-12, max_steps=1))
    assert not out.converged
    assert out.steps == 1


def test_non_finite_start_raises(single_epoch_tl):
    pp = make_problem(single_epoch_tl, 1.0)
    with pytest.raises(NonFiniteObjective):
        minimize(pp, [1e6])


def _coordinate_descent_minimum(pp, lo=-1.0, hi=4.0, sweeps=300):
    """Cyclic line minimization per coordinate, independent of the Newton code."""
    best = np.full(pp.n, 0.5)
    for _ in range(sweeps):
        before = best.copy()
        for i in range(pp.n):
            def along(x, i=i):
                trial = best.copy()
                trial[i] = x
                return evaluate(pp, trial, 0).value
            best[i] = minimize_scalar(along, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}).x
        if np.max(np.abs(best - before)) < 1e-10:
            break
    return best


@pytest.mark.parametrize("seed", range(4))
def test_matches_dense_minimizer(seed):
    rng = np.random.default_rng(seed)
    tl = build_timeline(
        [
            harvest(0, float(rng.uniform(1.0, 3.0))),
            data(0, float(rng.uniform(0.5, 1.5))),
            harvest(1.0, float(rng.uniform(0.5, 3.0))),
            channel(1.0, float(rng.uniform(0.5, 2.0))),
        ],
        initial_gain=float(rng.uniform(0.5, 2.0)),
    )
    pp = make_problem(tl, 2.0, mu=10.0)
    out = minimize(pp, [0.5, 0.5], NewtonConfig(eps_newton=1e-8))
    assert out.converged
    assert out.final_decrement <= 1e-8
    np.testing.assert_allclose(out.r, _coordinate_descent_minimum(pp), atol=1e-5)
