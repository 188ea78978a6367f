import time

import numpy as np
import pytest

from irs_isac.matrix import InvalidInputError
from irs_isac.sdp import Constraint, SdpProblem, SdpSolution, Status, kkt_residuals, solve

from oracles import cvxpy_value, random_sdp


def trace_cap_problem():
    return SdpProblem([1], 0, {0: np.eye(1)}, {}, [Constraint({0: np.eye(1)}, "<=", 5.0)])


def eigen_problem():
    # maximize t s.t. t <= tr(diag(1,2) X), tr X <= 1
    return SdpProblem([2], 1, {}, {0: 1.0}, [Constraint({0: np.diag([1.0, 2.0])}, ">=", 0.0, {0: -1.0}),
                                            Constraint({0: np.eye(2)}, "<=", 1.0)])


def test_trace_cap():
    sol = solve(trace_cap_problem())
    assert sol.status == Status.OPTIMAL
    assert sol.objective == pytest.approx(5.0, rel=1e-8)


def test_eigenvalue_maximisation():
    sol = solve(eigen_problem())
    assert sol.status == Status.OPTIMAL
    assert sol.objective == pytest.approx(2.0, rel=1e-8)
    np.testing.assert_allclose(sol.blocks[0], np.diag([0.0, 1.0]), atol=1e-6)


def test_kkt_at_analytic_optimum():
    p = trace_cap_problem()
    exact = SdpSolution(Status.OPTIMAL, [np.array([[5.0]])], np.zeros(0), 5.0, np.array([-1.0]), 5.0, 0, 0)
    res = kkt_residuals(p, exact)
    assert max(res["primal_res"], res["dual_res"], res["gap"]) <= 1e-10


def test_kkt_detects_perturbed_primal():
    p = trace_cap_problem()
    bad = SdpSolution(Status.OPTIMAL, [np.array([[5.1]])], np.zeros(0), 5.1, np.array([-1.0]), 5.0, 0, 0)
    assert kkt_residuals(p, bad)["primal_res"] >= 0.05


def test_random_problems_match_oracle():
    rng = np.random.default_rng(0)
    for _ in range(20):
        p = random_sdp(rng)
        sol = solve(p)
        assert sol.status == Status.OPTIMAL
        ref = cvxpy_value(p)
        assert abs(sol.objective - ref) <= 1e-5 * max(1.0, abs(ref))
        res = kkt_residuals(p, sol)
        assert max(res["primal_res"], res["dual_res"], res["gap"]) <= 1e-6


def test_invariants_on_random_problems():
    rng = np.random.default_rng(11)
    for _ in range(10):
        p = random_sdp(rng)
        sol = solve(p)
        # weak duality (maximisation): primal <= dual + tol
        assert sol.objective <= sol.dual_objective + 1e-7 * (1 + abs(sol.objective))
        for X in sol.blocks:
            assert np.linalg.eigvalsh(X)[0] >= -1e-8 * max(1.0, np.trace(X).real)
        again = solve(p)
        assert again.status == sol.status and abs(again.objective - sol.objective) <= 1e-12 * (1 + abs(sol.objective))


def test_minimize_sense():
    # minimize tr(X) s.t. X[0,0] >= 1, X[1,1] >= 2
    E0, E1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    p = SdpProblem([2], 0, {0: np.eye(2)}, {}, [Constraint({0: E0}, ">=", 1.0), Constraint({0: E1}, ">=", 2.0)],
                   "minimize")
    sol = solve(p)
    assert sol.status == Status.OPTIMAL and sol.objective == pytest.approx(3.0, rel=1e-7)


def test_infeasible_certificate():
    p = SdpProblem([2], 0, {0: np.eye(2)}, {}, [Constraint({0: np.eye(2)}, "<=", -1.0)])
    assert solve(p).status == Status.INFEASIBLE


def test_unbounded_certificate():
    p = SdpProblem([2], 0, {0: np.eye(2)}, {}, [Constraint({0: np.diag([1.0, -1.0])}, "==", 0.0)])
    assert solve(p).status == Status.UNBOUNDED


def test_complex_coupling():
    # maximize Re(X01) with unit diagonal: optimum 1 at X = [[1, 1], [1, 1]]
    C = np.array([[0, 0.5], [0.5, 0]])
    p = SdpProblem([2], 0, {0: C}, {}, [Constraint({0: np.diag([1.0, 0.0])}, "==", 1.0),
                                       Constraint({0: np.diag([0.0, 1.0])}, "==", 1.0)])
    sol = solve(p)
    assert sol.objective == pytest.approx(1.0, rel=1e-7)
    # imaginary coupling reaches the same optimum with a rotated off-diagonal
    p2 = SdpProblem([2], 0, {0: np.array([[0, 0.5j], [-0.5j, 0]])}, {}, p.constraints)
    sol2 = solve(p2)
    assert sol2.objective == pytest.approx(1.0, rel=1e-7)
    assert abs(sol2.blocks[0][0, 1]) == pytest.approx(1.0, rel=1e-6)


def test_json_round_trip():
    p = random_sdp(np.random.default_rng(4))
    q = SdpProblem.from_json(p.to_json())
    assert solve(q).objective == pytest.approx(solve(p).objective, rel=1e-12)


def test_input_validation():
    with pytest.raises(InvalidInputError):
        Constraint({0: np.eye(2)}, "!=", 1.0)
    with pytest.raises(InvalidInputError):
        SdpProblem([2], 0, {0: np.eye(3)}, {}, [])
    with pytest.raises(InvalidInputError):
        solve(trace_cap_problem(), tol=0.0)


def test_runtime_budget():
    rng = np.random.default_rng(0)
    probs = [random_sdp(rng) for _ in range(20)]
    t0 = time.perf_counter()
    for p in probs:
        solve(p)
    assert time.perf_counter() - t0 < 10.0
