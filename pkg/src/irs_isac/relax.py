"""SDR subproblems of the IRS-assisted ISAC design and their rank-one recovery.

Two subproblems alternate:

* BS side (fixed phase vector): lift w_k w_k^H to W_k and solve for
  {W_k}, R0 and the epigraph variable t.  Type-II users additionally see
  h^H R0 h as interference.
* IRS side (fixed beamformers): lift the extended reflection vector to a
  (N+1) x (N+1) matrix V and solve for V and t.

Lifting convention: effective channels use Phi^H, so they are affine in
conj(phi).  The lifted vector is therefore  [conj(phi); 1]  (see `lift`), and a
randomised vector r is mapped back through phi = conj(exp(j arg(r[:N] / r[N]))).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import sdp
from .channel import ChannelSet, ScenarioConfig, check_phase
from .matrix import InvalidInputError, herm_part, psd_factor, complex_normal

FEAS_TOL = 1e-9


class DegenerateSolutionError(ValueError):
    """A relaxed beamformer delivers no power to its user."""


class NumericalFailureError(RuntimeError):
    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


# --------------------------------------------------------------------------- #
# data containers


@dataclass
class BeamformingSolution:
    W: np.ndarray  # (K, M, M)
    R0: np.ndarray  # (M, M)
    objective: float = np.nan
    w: np.ndarray | None = None  # (K, M) once extracted
    rank_one: tuple = ()

    @classmethod
    def from_vectors(cls, w, R0, objective=np.nan, **kw) -> "BeamformingSolution":
        w = np.asarray(w, dtype=complex)
        return cls(W=outer_stack(w), R0=np.asarray(R0, dtype=complex), objective=objective, w=w, **kw)

    @property
    def total(self) -> np.ndarray:
        return self.R0 + self.W.sum(axis=0)

    @property
    def power(self) -> float:
        return float(np.trace(self.total).real)


@dataclass
class PhaseSolution:
    phi: np.ndarray
    objective: float
    V: np.ndarray | None = None
    source: str = "incumbent"  # "incumbent", "eigenvector" or "randomization"
    feasible_candidates: int = 0
    best_any: np.ndarray | None = None  # (n, N) highest-gain candidates ignoring the constraints


@dataclass
class Metrics:
    beampattern: np.ndarray  # (L,)
    signal: np.ndarray  # (K,) |h_k^H w_k|^2
    interference: np.ndarray  # (K,) multi-user interference
    sensing_interference: np.ndarray  # (K,) h_k^H R0 h_k
    noise: np.ndarray
    clutter: np.ndarray  # (Q,)
    cross_corr: float  # nan when L < 2
    power: float

    @property
    def sinr_I(self):
        return self.signal / (self.interference + self.noise)

    @property
    def sinr_II(self):
        return self.signal / (self.interference + self.sensing_interference + self.noise)

    def sinr(self, cu_type: str):
        return self.sinr_I if cu_type == "I" else self.sinr_II

    @property
    def min_gain(self) -> float:
        return float(np.min(self.beampattern))


def outer_stack(w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    return w[:, :, None] * w[:, None, :].conj()


def lift(phi) -> np.ndarray:
    """Extended vector [conj(phi); 1] whose outer product is the lifted variable."""
    return np.append(np.conj(phi), 1.0)


def _as_covariances(w_or_W, K: int, M: int) -> np.ndarray:
    arr = np.asarray(w_or_W, dtype=complex)
    if arr.shape == (K, M):
        return outer_stack(arr)
    if arr.shape == (K, M, M):
        return arr
    raise InvalidInputError(f"beamformers must have shape {(K, M)} or {(K, M, M)}, got {arr.shape}")


# --------------------------------------------------------------------------- #
# direct metrics


def batch_metrics(channels: ChannelSet, phis, W, R0, config: ScenarioConfig) -> dict:
    """Metrics for a stack of phase vectors ``phis`` (T, N); arrays carry a leading T axis."""
    G = channels.G
    phis = np.atleast_2d(phis)
    cp = np.conj(phis)
    h_cu = np.einsum("tn,kn,nm->tkm", cp, channels.h_iu, G.conj()) + channels.h_bu
    h_t = np.einsum("tn,ln,nm->tlm", cp, channels.a, G.conj())
    g_cl = np.einsum("tn,qn,nm->tqm", cp, channels.g_ic, G.conj()) + channels.g_bc
    R = R0 + W.sum(axis=0)

    def quad(h, X):  # h^H X h per leading index
        return np.einsum("...m,mn,...n->...", h.conj(), X, h).real

    signal = np.einsum("tkm,kmn,tkn->tk", h_cu.conj(), W, h_cu).real
    total_w = quad(h_cu, W.sum(axis=0))
    out = {
        "beampattern": quad(h_t, R),
        "signal": signal,
        "interference": total_w - signal,
        "sensing_interference": quad(h_cu, R0),
        "clutter": quad(g_cl, R),
    }
    L = h_t.shape[1]
    if L >= 2:
        P = np.einsum("tlm,mn,tin->tli", h_t.conj(), R, h_t)
        iu = np.triu_indices(L, 1)
        out["cross_corr"] = P[:, iu[0], iu[1]].real.mean(axis=1)
    else:
        out["cross_corr"] = np.full(phis.shape[0], np.nan)
    return out


def metrics(channels: ChannelSet, phi, w, R0, config: ScenarioConfig) -> Metrics:
    """Beampattern gains, SINR terms, clutter powers and cross-correlation, evaluated directly.

    ``w`` may be beamforming vectors (K, M) or covariance matrices (K, M, M).
    The cross-correlation is the mean over target pairs of Re(h_l^H R h_i).
    """
    phi = check_phase(phi, channels.N)
    W = _as_covariances(w, config.K, channels.M)
    R0 = np.asarray(R0, dtype=complex)
    b = batch_metrics(channels, phi[None, :], W, R0, config)
    return Metrics(
        beampattern=b["beampattern"][0],
        signal=b["signal"][0],
        interference=b["interference"][0],
        sensing_interference=b["sensing_interference"][0],
        noise=config.noise,
        clutter=b["clutter"][0],
        cross_corr=float(b["cross_corr"][0]),
        power=float(np.trace(R0).real + np.einsum("kmm->", W).real),
    )


def feasible_mask(m: dict, config: ScenarioConfig, cu_type: str, tol: float = FEAS_TOL,
                  sensing_only: bool = False) -> np.ndarray:
    """Which rows of a `batch_metrics` result satisfy SINR, clutter and cross-correlation limits."""
    T = m["beampattern"].shape[0]
    ok = np.ones(T, dtype=bool)
    if sensing_only:
        return ok
    interf = m["interference"] + (m["sensing_interference"] if cu_type == "II" else 0.0)
    ok &= np.all(m["signal"] >= config.gammas * (1 - tol) * (interf + config.noise), axis=1)
    if config.Q:
        ok &= np.all(m["clutter"] <= config.etas * (1 + tol), axis=1)
    if np.isfinite(config.xi) and config.L >= 2:
        ok &= m["cross_corr"] <= config.xi + tol * abs(config.xi)
    return ok


# --------------------------------------------------------------------------- #
# BS-side subproblem


def _beamforming_problem(channels: ChannelSet, phi, config: ScenarioConfig, cu_type: str,
                         pin_r0: bool = False) -> sdp.SdpProblem:
    from .channel import effective_channels

    K, M, L = config.K, channels.M, config.L
    h_cu, h_t, g_cl = effective_channels(channels, phi)
    gammas, noise, etas = config.gammas, config.noise, config.etas
    blocks_W = list(range(K))
    r0 = None if pin_r0 else K
    dims = [M] * (K + (0 if pin_r0 else 1))
    all_blocks = blocks_W + ([] if pin_r0 else [r0])

    def on_all(A):
        return {b: A for b in all_blocks}

    H = [np.outer(h, h.conj()) for h in h_cu]
    B = [np.outer(h, h.conj()) for h in h_t]
    s = config.P0 * max(float(np.max(np.sum(np.abs(h_t) ** 2, axis=1))), 0.0)
    s = s if s > 0 else config.P0

    cons = [sdp.Constraint(on_all(np.eye(M) / config.P0), "<=", 1.0, name="power", scale=config.P0)]
    for k in range(K):
        blk = {j: (H[k] / gammas[k] if j == k else -H[k]) / noise[k] for j in blocks_W}
        if cu_type == "II" and not pin_r0:
            blk[r0] = -H[k] / noise[k]
        cons.append(sdp.Constraint(blk, ">=", 1.0, name=f"sinr_{k}", scale=noise[k]))
    for q in range(config.Q):
        Gq = np.outer(g_cl[q], g_cl[q].conj())
        cons.append(sdp.Constraint(on_all(Gq / etas[q]), "<=", 1.0, name=f"clutter_{q}", scale=etas[q]))
    if np.isfinite(config.xi) and L >= 2:
        pairs = [(l, i) for l in range(L) for i in range(l + 1, L)]
        Cx = sum(herm_part(np.outer(h_t[i], h_t[l].conj())) for l, i in pairs) / len(pairs)
        cons.append(sdp.Constraint(on_all(Cx / s), "<=", config.xi / s, name="cross", scale=s))
    for l in range(L):
        cons.append(sdp.Constraint(on_all(B[l] / s), ">=", 0.0, {0: -1.0}, name=f"target_{l}", scale=s))
    return sdp.SdpProblem(dims, 1, {}, {0: 1.0}, cons, "maximize", objective_scale=s,
                          meta={"kind": "beamforming", "cu_type": cu_type, "pin_r0": pin_r0, "K": K})


def build_beamforming_sdp_type1(channels: ChannelSet, phi, config: ScenarioConfig,
                                pin_r0: bool = False) -> sdp.SdpProblem:
    """Relaxed BS-side problem for Type-I users (sensing signal cancelled at the CUs).

    Blocks 0..K-1 are W_k, block K is R0 (absent when ``pin_r0``); nonneg 0 is t.
    Rows are normalised by their physical thresholds (P0, sigma_k^2, eta_q).
    """
    return _beamforming_problem(channels, phi, config, "I", pin_r0)


def build_beamforming_sdp_type2(channels: ChannelSet, phi, config: ScenarioConfig,
                                pin_r0: bool = False) -> sdp.SdpProblem:
    """As type 1 but R0 also interferes at every user."""
    return _beamforming_problem(channels, phi, config, "II", pin_r0)


def beamforming_from_solution(problem: sdp.SdpProblem, sol: sdp.SdpSolution) -> BeamformingSolution:
    K = problem.meta["K"]
    W = np.array(sol.blocks[:K])
    M = W.shape[1]
    R0 = np.zeros((M, M), dtype=complex) if problem.meta["pin_r0"] else sol.blocks[K]
    return BeamformingSolution(W=W, R0=R0, objective=float(sol.nonneg[0]) * problem.objective_scale)


def solve_beamforming(channels: ChannelSet, phi, config: ScenarioConfig, cu_type: str,
                      pin_r0: bool = False) -> tuple[BeamformingSolution, sdp.SdpSolution]:
    problem = _beamforming_problem(channels, phi, config, cu_type, pin_r0)
    sol = sdp.solve(problem, config.algo.sdp_tol, config.algo.sdp_max_iters)
    if sol.status not in (sdp.Status.OPTIMAL, sdp.Status.MAX_ITERS, sdp.Status.NUMERICAL_FAILURE):
        return None, sol
    relaxed = beamforming_from_solution(problem, sol)
    relaxed.objective = metrics(channels, phi, relaxed.W, relaxed.R0, config).min_gain
    return relaxed, sol


def extract_beamformers(W, R0, channels: ChannelSet, phi, config: ScenarioConfig,
                        rank_tol: float | None = None) -> BeamformingSolution:
    """Rank-one beamformers from a relaxed BS-side solution.

    w_k = W_k h_k / sqrt(h_k^H W_k h_k) and R0 <- R0 + sum_k (W_k - w_k w_k^H).
    For a rank-one W_k this is sqrt(lambda_k) v_k (with h_k^H w_k >= 0); in
    general it keeps h_k^H W_k h_k and the total covariance unchanged, so every
    constraint and the objective carry over.  ``rank_one`` records which W_k
    passed the lambda_max >= (1 - rank_tol) tr test.
    """
    from .channel import effective_channels

    rank_tol = config.algo.rank_tol if rank_tol is None else rank_tol
    W = _as_covariances(W, config.K, channels.M)
    R0 = np.asarray(R0, dtype=complex)
    h_cu, _, _ = effective_channels(channels, phi)
    w = np.zeros((config.K, channels.M), dtype=complex)
    flags = []
    for k in range(config.K):
        Wk = herm_part(W[k])
        lam = np.linalg.eigvalsh(Wk)
        tr = float(np.trace(Wk).real)
        flags.append(bool(tr > 0 and lam[-1] >= (1 - rank_tol) * tr))
        Wh = Wk @ h_cu[k]
        gain = float(np.real(h_cu[k].conj() @ Wh))
        if not gain > 0:
            raise DegenerateSolutionError(f"CU {k} receives no power from its relaxed beamformer")
        w[k] = Wh / np.sqrt(gain)
    R0_new = herm_part(R0 + W.sum(axis=0) - outer_stack(w).sum(axis=0))
    # solver round-off can leave the budget exceeded by ~tol; trim R0 first
    excess = float(np.trace(R0_new).real + np.sum(np.abs(w) ** 2)) - config.P0
    if excess > 0:
        tr0 = float(np.trace(R0_new).real)
        if tr0 >= excess:
            R0_new = R0_new * (1 - excess / tr0)
        else:
            R0_new = np.zeros_like(R0_new)
            w = w * np.sqrt(config.P0 / np.sum(np.abs(w) ** 2))
    out = BeamformingSolution.from_vectors(w, R0_new, rank_one=tuple(flags))
    out.objective = metrics(channels, phi, w, R0_new, config).min_gain
    return out


def drop_sensing_covariance(solution: BeamformingSolution, channels: ChannelSet, phi,
                            config: ScenarioConfig) -> BeamformingSolution:
    """Fold R0 into the user covariances (W_k + R0 / K) for Type-II users.

    Returns covariance-form beamformers with R0 = 0 and the same total
    covariance; raises NumericalFailureError if the audit of the result fails.
    """
    K = config.K
    R0 = np.asarray(solution.R0, dtype=complex)
    W = solution.W
    if not np.any(R0):
        return BeamformingSolution(W=W.copy(), R0=R0.copy(), objective=solution.objective,
                                   w=None if solution.w is None else solution.w.copy())
    W_new = W + R0[None, :, :] / K
    R0_new = np.zeros_like(R0)
    before = metrics(channels, phi, W, R0, config)
    after = metrics(channels, phi, W_new, R0_new, config)
    gam = config.gammas
    margin_before = before.signal - gam * (before.interference + before.sensing_interference + before.noise)
    margin_after = after.signal - gam * (after.interference + after.sensing_interference + after.noise)
    scale = np.maximum(gam * after.noise, 1e-300)
    res = {
        "objective": abs(after.min_gain - before.min_gain) / max(abs(before.min_gain), 1e-300),
        "power": abs(after.power - before.power) / config.P0,
        "sinr": float(np.max((margin_before - margin_after) / scale)),
    }
    if res["objective"] > 1e-9 or res["power"] > 1e-12 or res["sinr"] > 1e-9:
        raise NumericalFailureError("sensing-covariance removal failed its audit", res)
    return BeamformingSolution(W=W_new, R0=R0_new, objective=after.min_gain)


# --------------------------------------------------------------------------- #
# IRS-side subproblem


@dataclass
class AugmentedForms:
    """Lifted (N+1) x (N+1) coefficient matrices of the IRS-side problem."""

    Rbar_target: np.ndarray  # (L, n, n)
    Rbar_target_pair: dict  # (l, i) -> (n, n), not hermitised
    Rbar_cu: np.ndarray  # (K, K, n, n), [k, j]
    Fbar_cu: np.ndarray  # (K, n, n)
    Rbar_clutter: np.ndarray  # (Q, n, n)
    c_I: np.ndarray
    c_II: np.ndarray
    clutter_direct: np.ndarray  # g_bc^H R g_bc
    gammas: np.ndarray
    L: int = 0
    K: int = 0
    extras: dict = field(default_factory=dict)

    def sinr_matrix(self, k: int, cu_type: str) -> np.ndarray:
        A = self.Rbar_cu[k, k] / self.gammas[k] - sum(self.Rbar_cu[k, j] for j in range(self.K) if j != k)
        if cu_type == "II":
            A = A - self.Fbar_cu[k]
        return A

    def sinr_rhs(self, cu_type: str) -> np.ndarray:
        return self.c_I if cu_type == "I" else self.c_II

    def cross_matrix(self) -> np.ndarray | None:
        if self.L < 2:
            return None
        pairs = list(self.Rbar_target_pair.values())
        return sum(herm_part(P) for P in pairs) / len(pairs)

    def functionals(self, V, cu_type: str) -> dict:
        """Physical values of every constraint functional at lifted V.

        sinr[k] is signal/Gamma_k - interference - noise (>= 0 when satisfied),
        clutter[q] the total clutter power, target[l] the beampattern gain.
        """
        def tr(A):
            return float(np.real(np.vdot(A, V)))

        C = self.cross_matrix()
        return {
            "target": np.array([tr(A) for A in self.Rbar_target]),
            "sinr": np.array([tr(self.sinr_matrix(k, cu_type)) for k in range(self.K)]) - self.sinr_rhs(cu_type),
            "clutter": np.array([tr(A) for A in self.Rbar_clutter]) + self.clutter_direct,
            "cross": np.nan if C is None else tr(C),
        }


def _pad(R, b=None) -> np.ndarray:
    n = R.shape[0]
    out = np.zeros((n + 1, n + 1), dtype=complex)
    out[:n, :n] = R
    if b is not None:
        out[:n, n] = b
        out[n, :n] = b.conj()
    return out


def augmented_forms(channels: ChannelSet, w, R0, config: ScenarioConfig) -> AugmentedForms:
    K, L, Q = config.K, config.L, config.Q
    G = channels.G
    M = G.shape[1]
    W = _as_covariances(w, K, M)
    R0 = np.asarray(R0, dtype=complex)
    R = R0 + W.sum(axis=0)
    noise, gam = config.noise, config.gammas

    def dg_G(v):  # diag(v)^H G
        return np.conj(v)[:, None] * G

    GA = [dg_G(a) for a in channels.a]
    Rbar_target = np.array([_pad(Ga @ R @ Ga.conj().T) for Ga in GA])
    pairs = {(l, i): _pad(GA[l] @ R @ GA[i].conj().T) for l in range(L) for i in range(l + 1, L)}

    n = G.shape[0] + 1
    Rbar_cu = np.zeros((K, K, n, n), dtype=complex)
    Fbar = np.zeros((K, n, n), dtype=complex)
    c_I = np.zeros(K)
    sens = np.zeros(K)
    for k in range(K):
        Ak = dg_G(channels.h_iu[k])
        hb = channels.h_bu[k]
        direct = np.array([float(np.real(hb.conj() @ W[j] @ hb)) for j in range(K)])
        for j in range(K):
            Rbar_cu[k, j] = _pad(Ak @ W[j] @ Ak.conj().T, Ak @ W[j] @ hb)
        Fbar[k] = _pad(Ak @ R0 @ Ak.conj().T, Ak @ R0 @ hb)
        c_I[k] = direct.sum() - direct[k] - direct[k] / gam[k] + noise[k]
        sens[k] = float(np.real(hb.conj() @ R0 @ hb))
    Rbar_cl = np.zeros((Q, n, n), dtype=complex)
    cl_direct = np.zeros(Q)
    for q in range(Q):
        Cq = dg_G(channels.g_ic[q])
        gb = channels.g_bc[q]
        Rbar_cl[q] = _pad(Cq @ R @ Cq.conj().T, Cq @ R @ gb)
        cl_direct[q] = float(np.real(gb.conj() @ R @ gb))
    return AugmentedForms(Rbar_target=Rbar_target, Rbar_target_pair=pairs, Rbar_cu=Rbar_cu, Fbar_cu=Fbar,
                          Rbar_clutter=Rbar_cl, c_I=c_I, c_II=c_I + sens, clutter_direct=cl_direct,
                          gammas=gam, L=L, K=K)


def build_phase_sdp(channels: ChannelSet, w, R0, config: ScenarioConfig, cu_type: str,
                    sensing_only: bool = False) -> sdp.SdpProblem:
    """Relaxed IRS-side problem over the lifted matrix V (block 0), t = nonneg 0.

    ``sensing_only`` keeps just the target gains and the unit diagonal.
    """
    forms = augmented_forms(channels, w, R0, config)
    n = channels.N + 1
    s = float(np.max(np.trace(forms.Rbar_target, axis1=1, axis2=2).real))
    s = s if s > 0 else 1.0
    cons = []
    if not sensing_only:
        rhs = forms.sinr_rhs(cu_type)
        for k in range(config.K):
            sig = config.noise[k]
            cons.append(sdp.Constraint({0: forms.sinr_matrix(k, cu_type) / sig}, ">=", rhs[k] / sig,
                                       name=f"sinr_{k}", scale=sig))
        for q in range(config.Q):
            eta = config.etas[q]
            cons.append(sdp.Constraint({0: forms.Rbar_clutter[q] / eta}, "<=",
                                       (eta - forms.clutter_direct[q]) / eta, name=f"clutter_{q}", scale=eta))
        if np.isfinite(config.xi) and config.L >= 2:
            cons.append(sdp.Constraint({0: forms.cross_matrix() / s}, "<=", config.xi / s, name="cross", scale=s))
    for i in range(n):
        E = np.zeros((n, n))
        E[i, i] = 1.0
        cons.append(sdp.Constraint({0: E}, "==", 1.0, name=f"diag_{i}"))
    for l in range(config.L):
        cons.append(sdp.Constraint({0: forms.Rbar_target[l] / s}, ">=", 0.0, {0: -1.0}, name=f"target_{l}", scale=s))
    return sdp.SdpProblem([n], 1, {}, {0: 1.0}, cons, "maximize", objective_scale=s,
                          meta={"kind": "phase", "cu_type": cu_type, "forms": forms, "sensing_only": sensing_only})


def phases_from_lifted(r) -> np.ndarray:
    """Map lifted vectors r (..., N+1) to unit-modulus phase vectors (..., N)."""
    r = np.asarray(r)
    ratio = r[..., :-1] / r[..., -1:]
    return np.conj(np.exp(1j * np.angle(ratio)))


def gaussian_randomization(Vstar, channels: ChannelSet, w, R0, config: ScenarioConfig, cu_type: str,
                           trials: int, rng: np.random.Generator, incumbent=None,
                           sensing_only: bool = False, keep_top: int = 1) -> PhaseSolution:
    """Recover a unit-modulus phase vector from a lifted solution V*.

    Draws r ~ CN(0, V*) ``trials`` times (plus the principal eigenvector of V*
    as candidate 0), maps each to a phase vector and keeps the best one that
    meets every IRS-side constraint.  The incumbent wins ties and is returned
    when nothing feasible beats it, so the objective never decreases.
    The ``keep_top`` highest-gain draws, feasible or not, are returned in
    ``best_any`` for callers that re-optimise the beamformers.
    """
    N = channels.N
    W = _as_covariances(w, config.K, channels.M)
    R0 = np.asarray(R0, dtype=complex)
    F = psd_factor(Vstar)
    z = complex_normal(rng, (trials, N + 1))
    r = np.vstack([np.linalg.eigh(herm_part(Vstar)).eigenvectors[:, -1], z @ F.T])
    valid = np.abs(r[:, -1]) > 0
    r[~valid, -1] = 1.0
    cands = phases_from_lifted(r)

    m = batch_metrics(channels, cands, W, R0, config)
    ok = feasible_mask(m, config, cu_type, sensing_only=sensing_only) & valid
    obj = m["beampattern"].min(axis=1)

    if incumbent is not None:
        inc = check_phase(incumbent, N)
        inc_obj = float(batch_metrics(channels, inc[None, :], W, R0, config)["beampattern"].min())
    else:
        inc, inc_obj = None, -np.inf
    n_ok = int(ok.sum())
    order = np.argsort(-np.where(valid, obj, -np.inf), kind="stable")
    best_any = cands[order[:max(keep_top, 0)]]
    if n_ok:
        masked = np.where(ok, obj, -np.inf)
        best = int(np.argmax(masked))  # first index on ties
        if masked[best] > inc_obj:
            return PhaseSolution(phi=cands[best], objective=float(masked[best]), V=Vstar,
                                 source="eigenvector" if best == 0 else "randomization", feasible_candidates=n_ok,
                                 best_any=best_any)
    if inc is None:
        raise NumericalFailureError("no feasible randomisation candidate and no incumbent to fall back on")
    return PhaseSolution(phi=inc, objective=inc_obj, V=Vstar, source="incumbent", feasible_candidates=n_ok,
                         best_any=best_any)


def solve_phase(channels: ChannelSet, w, R0, config: ScenarioConfig, cu_type: str,
                sensing_only: bool = False) -> tuple[np.ndarray | None, sdp.SdpSolution]:
    problem = build_phase_sdp(channels, w, R0, config, cu_type, sensing_only)
    sol = sdp.solve(problem, config.algo.sdp_tol, config.algo.sdp_max_iters)
    if sol.status in (sdp.Status.INFEASIBLE, sdp.Status.UNBOUNDED):
        return None, sol
    return sol.blocks[0], sol
