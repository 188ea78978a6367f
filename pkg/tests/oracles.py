"""Independent reference computations used by the tests (never imported by the package)."""

import cvxpy as cp
import numpy as np

from irs_isac.sdp import Constraint, SdpProblem

from conftest import rand_herm


def random_sdp(rng) -> SdpProblem:
    """Feasible, bounded random problem: 1-2 Hermitian blocks of size <= 6, <= 10 rows."""
    dims = [int(rng.integers(1, 7)) for _ in range(int(rng.integers(1, 3)))]
    X0 = []
    for n in dims:
        F = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        X0.append(F @ F.conj().T / n + 0.1 * np.eye(n))
    cons = []
    for _ in range(int(rng.integers(1, 10))):
        blocks = {b: rand_herm(rng, n) for b, n in enumerate(dims)}
        lhs = sum(np.real(np.vdot(A, X0[b])) for b, A in blocks.items())
        rel = str(rng.choice(["==", "<=", ">="]))
        slack = 0.0 if rel == "==" else rng.uniform(0, 1) * (1.0 if rel == "<=" else -1.0)
        cons.append(Constraint(blocks, rel, float(lhs + slack)))
    total = float(sum(np.trace(X).real for X in X0)) + 1.0
    cons.append(Constraint({b: np.eye(n) for b, n in enumerate(dims)}, "<=", total))
    return SdpProblem(dims, 0, {b: rand_herm(rng, n) for b, n in enumerate(dims)}, {}, cons, "maximize")


def cvxpy_value(problem: SdpProblem) -> float:
    """Objective of ``problem`` from CLARABEL at tight tolerances."""
    Xs = [cp.Variable((n, n), hermitian=True) for n in problem.block_dims]
    x = cp.Variable(problem.nonneg_count, nonneg=True) if problem.nonneg_count else None
    cons = [X >> 0 for X in Xs]

    def expr(blocks, nonneg):
        e = sum(cp.real(cp.trace(A @ Xs[b])) for b, A in blocks.items())
        return e + sum(v * x[j] for j, v in nonneg.items())

    for c in problem.constraints:
        e = expr(c.blocks, c.nonneg)
        cons.append({"==": e == c.rhs, "<=": e <= c.rhs, ">=": e >= c.rhs}[c.relation])
    obj = expr(problem.objective_blocks, problem.objective_nonneg)
    sense = cp.Maximize if problem.sense == "maximize" else cp.Minimize
    prob = cp.Problem(sense(obj), cons)
    prob.solve(solver="CLARABEL", tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    return float(prob.value)


def naive_metrics(channels, phi, W, R0, config):
    """Direct scalar-loop evaluation of gains, SINR terms, clutter and cross-correlation."""
    N, M = channels.G.shape
    K, L, Q = config.K, config.L, config.Q
    R = R0 + sum(W)

    def eff(v, direct):
        out = np.zeros(M, dtype=complex)
        for m in range(M):
            s = direct[m]
            for n in range(N):
                s += np.conj(channels.G[n, m]) * np.conj(phi[n]) * v[n]
            out[m] = s
        return out

    def quad(h, X):
        s = 0j
        for i in range(M):
            for j in range(M):
                s += np.conj(h[i]) * X[i, j] * h[j]
        return s.real

    zero = np.zeros(M)
    h_cu = [eff(channels.h_iu[k], channels.h_bu[k]) for k in range(K)]
    h_t = [eff(channels.a[l], zero) for l in range(L)]
    g_cl = [eff(channels.g_ic[q], channels.g_bc[q]) for q in range(Q)]
    signal = np.array([quad(h_cu[k], W[k]) for k in range(K)])
    interf = np.array([sum(quad(h_cu[k], W[j]) for j in range(K) if j != k) for k in range(K)])
    sens = np.array([quad(h_cu[k], R0) for k in range(K)])
    pairs = [(l, i) for l in range(L) for i in range(l + 1, L)]
    cross = np.mean([sum(np.conj(h_t[l][a]) * R[a, b] * h_t[i][b] for a in range(M) for b in range(M)).real
                     for l, i in pairs]) if pairs else np.nan
    return {
        "beampattern": np.array([quad(h, R) for h in h_t]),
        "signal": signal,
        "interference": interf,
        "sensing_interference": sens,
        "sinr_I": signal / (interf + config.noise),
        "sinr_II": signal / (interf + sens + config.noise),
        "clutter": np.array([quad(g, R) for g in g_cl]),
        "cross_corr": cross,
    }


def lifted_direct_error(channels, phi, w, R0, config, cu_type) -> float:
    """Largest relative gap between the IRS-side functionals at V = v v^H and the direct metrics."""
    from irs_isac import relax

    v = relax.lift(phi)
    forms = relax.augmented_forms(channels, w, R0, config)
    f = forms.functionals(np.outer(v, v.conj()), cu_type)
    W = relax.outer_stack(w) if np.ndim(w) == 2 else w
    d = naive_metrics(channels, phi, W, R0, config)
    interf = d["interference"] + (d["sensing_interference"] if cu_type == "II" else 0.0)
    margin = d["signal"] / config.gammas - interf - config.noise
    margin_scale = d["signal"] / config.gammas + interf + config.noise
    errs = [np.abs(f["target"] - d["beampattern"]) / np.maximum(np.abs(d["beampattern"]), 1e-300),
            np.abs(f["sinr"] - margin) / margin_scale,
            np.abs(f["clutter"] - d["clutter"]) / np.maximum(np.abs(d["clutter"]), 1e-300)]
    if config.L >= 2:
        scale = np.max(d["beampattern"])
        errs.append(np.array([abs(f["cross"] - d["cross_corr"]) / scale]))
    return float(max(np.max(e, initial=0.0) for e in errs))


def degenerate_instance(seed, cu_type):
    """Single-user desk instance whose BS->IRS link is a scaled identity (N = M = 4).

    The target channels then need a spread covariance, and with only one user
    the relaxed user covariance shares that spread, so rank(W_1) > 1.
    """
    from dataclasses import replace

    from irs_isac.channel import ScenarioConfig, build_channels

    config = ScenarioConfig(M=4, N=4, K=1, L=3, Q=1, gamma=10.0, cu_type=cu_type)
    ch = build_channels(config, np.random.default_rng(seed))
    g = np.sqrt(np.mean(np.abs(ch.G) ** 2))
    return config, replace(ch, G=g * np.eye(4, dtype=complex)), np.ones(4, dtype=complex)
