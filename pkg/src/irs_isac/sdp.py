"""Linear programs over Hermitian PSD blocks and nonnegative scalars.

A problem is

    maximize/minimize   sum_b Re tr(C_b X_b) + sum_j c_j x_j
    subject to          sum_b Re tr(A_ib X_b) + sum_j a_ij x_j  (=, <=, >=)  b_i
                        X_b Hermitian PSD, x_j >= 0.

Complex blocks are mapped to real symmetric ones with `matrix.realify`
(coefficients halved to undo the factor-2 trace identity) and the result is
solved with a homogeneous self-dual primal-dual interior-point method
(HKM search direction, Mehrotra predictor-corrector).  The embedding lets the
method return infeasibility/unboundedness certificates instead of diverging.

Dual variables are reported in the convention of the equivalent minimisation
problem (objective multiplied by -1 when maximising): y_i >= 0 on ">=" rows,
y_i <= 0 on "<=" rows, and  sign*C_b - sum_i y_i A_ib  must be PSD.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla

from .matrix import InvalidInputError, herm_part, realify, unrealify

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
NEAR_OPTIMAL_FACTOR = 100.0
DEFAULT_MAX_ITERS = 200
RELATIONS = ("==", "<=", ">=")
REFINE_STEPS = 2
STEP_FRACTION = 0.98


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    MAX_ITERS = "MaxIters"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass
class Constraint:
    """One linear row. ``scale`` records the factor the row was divided by, so
    ``scale * lhs`` is the functional in its physical units."""

    blocks: dict
    relation: str
    rhs: float
    nonneg: dict = field(default_factory=dict)
    name: str = ""
    scale: float = 1.0

    def __post_init__(self):
        if self.relation not in RELATIONS:
            raise InvalidInputError(f"relation must be one of {RELATIONS}, got {self.relation!r}")
        if not np.isfinite(self.rhs):
            raise InvalidInputError(f"constraint {self.name!r} has non-finite rhs")
        self.blocks = {int(b): herm_part(np.asarray(A, dtype=complex)) for b, A in self.blocks.items()}
        self.nonneg = {int(j): float(v) for j, v in self.nonneg.items()}


@dataclass
class SdpProblem:
    block_dims: list
    nonneg_count: int
    objective_blocks: dict
    objective_nonneg: dict
    constraints: list
    sense: str = "maximize"
    objective_scale: float = 1.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sense not in ("maximize", "minimize"):
            raise InvalidInputError("sense must be 'maximize' or 'minimize'")
        self.block_dims = [int(n) for n in self.block_dims]
        if not self.block_dims and self.nonneg_count == 0:
            raise InvalidInputError("problem has no variables")
        self.objective_blocks = {int(b): herm_part(np.asarray(C, dtype=complex))
                                 for b, C in self.objective_blocks.items()}
        self.objective_nonneg = {int(j): float(v) for j, v in self.objective_nonneg.items()}
        for con in [None, *self.constraints]:
            blocks = self.objective_blocks if con is None else con.blocks
            nonneg = self.objective_nonneg if con is None else con.nonneg
            for b, A in blocks.items():
                if not 0 <= b < len(self.block_dims) or A.shape != (self.block_dims[b],) * 2:
                    raise InvalidInputError(f"coefficient for block {b} has wrong index or shape")
            for j in nonneg:
                if not 0 <= j < self.nonneg_count:
                    raise InvalidInputError(f"nonneg index {j} out of range")

    @property
    def sign(self) -> float:
        return -1.0 if self.sense == "maximize" else 1.0

    def lhs(self, con: Constraint, blocks, nonneg) -> float:
        val = sum(float(np.real(np.vdot(A, blocks[b]))) for b, A in con.blocks.items())
        return val + sum(v * float(nonneg[j]) for j, v in con.nonneg.items())

    def objective_value(self, blocks, nonneg) -> float:
        val = sum(float(np.real(np.vdot(C, blocks[b]))) for b, C in self.objective_blocks.items())
        return val + sum(v * float(nonneg[j]) for j, v in self.objective_nonneg.items())

    def to_dict(self) -> dict:
        def enc(A):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(A)]

        def enc_row(blocks, nonneg):
            return {"blocks": {str(b): enc(A) for b, A in sorted(blocks.items())},
                    "nonneg": {str(j): v for j, v in sorted(nonneg.items())}}

        return {
            "sense": self.sense,
            "block_dims": self.block_dims,
            "nonneg_count": self.nonneg_count,
            "objective_scale": self.objective_scale,
            "objective": enc_row(self.objective_blocks, self.objective_nonneg),
            "constraints": [dict(enc_row(c.blocks, c.nonneg), relation=c.relation, rhs=c.rhs,
                                 name=c.name, scale=c.scale) for c in self.constraints],
        }

    def to_json(self, **kwargs) -> str:
        """Debug dump: coefficient matrices as nested [re, im] pairs."""
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "SdpProblem":
        d = json.loads(text)

        def dec(rows):
            return np.array([[complex(re, im) for re, im in row] for row in rows])

        def dec_row(r):
            return ({int(b): dec(A) for b, A in r["blocks"].items()},
                    {int(j): v for j, v in r["nonneg"].items()})

        cons = []
        for c in d["constraints"]:
            blocks, nonneg = dec_row(c)
            cons.append(Constraint(blocks, c["relation"], c["rhs"], nonneg, c.get("name", ""), c.get("scale", 1.0)))
        ob, on = dec_row(d["objective"])
        return cls(d["block_dims"], d["nonneg_count"], ob, on, cons, d["sense"], d.get("objective_scale", 1.0))


@dataclass
class SdpSolution:
    status: Status
    blocks: list
    nonneg: np.ndarray
    objective: float
    dual: np.ndarray
    dual_objective: float
    duality_gap: float
    max_constraint_violation: float
    iterations: int = 0
    residuals: dict = field(default_factory=dict)
    reduced_accuracy: bool = False  # Optimal only within NEAR_OPTIMAL_FACTOR * tol

    @property
    def optimal(self) -> bool:
        return self.status == Status.OPTIMAL


# --------------------------------------------------------------------------- #
# standard form


@dataclass
class _StandardForm:
    A_blk: list  # per block: (m, n, n) real symmetric
    A_lp: np.ndarray  # (m, p)
    b: np.ndarray
    c_blk: list
    c_lp: np.ndarray
    c_scale: float
    n_user_nonneg: int


def _standard_form(problem: SdpProblem) -> _StandardForm:
    m = len(problem.constraints)
    n_ineq = sum(c.relation != "==" for c in problem.constraints)
    p = problem.nonneg_count + n_ineq
    A_blk = [np.zeros((m, 2 * n, 2 * n)) for n in problem.block_dims]
    A_lp = np.zeros((m, p))
    b = np.zeros(m)
    slack = problem.nonneg_count
    for i, con in enumerate(problem.constraints):
        for blk, A in con.blocks.items():
            A_blk[blk][i] = 0.5 * realify(A)
        for j, v in con.nonneg.items():
            A_lp[i, j] = v
        if con.relation == ">=":
            A_lp[i, slack] = -1.0
            slack += 1
        elif con.relation == "<=":
            A_lp[i, slack] = 1.0
            slack += 1
        b[i] = con.rhs
    sign = problem.sign
    c_blk = [np.zeros((2 * n, 2 * n)) for n in problem.block_dims]
    for blk, C in problem.objective_blocks.items():
        c_blk[blk] = sign * 0.5 * realify(C)
    c_lp = np.zeros(p)
    for j, v in problem.objective_nonneg.items():
        c_lp[j] = sign * v
    c_norm = max([np.linalg.norm(C) for C in c_blk] + [np.linalg.norm(c_lp)])
    c_scale = c_norm if c_norm > 0 else 1.0
    return _StandardForm(A_blk, A_lp, b, [C / c_scale for C in c_blk], c_lp / c_scale, c_scale,
                         problem.nonneg_count)


def _inf_norm(v) -> float:
    return float(np.max(np.abs(v), initial=0.0))


def _sym(Z):
    return 0.5 * (Z + Z.T)


def _max_step(X, dX) -> float:
    """Largest a with X + a dX PSD (X must be positive definite)."""
    if X.size == 0:
        return np.inf
    L = np.linalg.cholesky(X)
    Li = sla.solve_triangular(L, np.eye(L.shape[0]), lower=True)
    lam = np.linalg.eigvalsh(_sym(Li @ dX @ Li.T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x, dx) -> float:
    neg = dx < 0
    return float(np.min(-x[neg] / dx[neg])) if np.any(neg) else np.inf


class _Hsde:
    """Homogeneous self-dual embedding of  min c.x  s.t.  A x = b,  x in K."""

    def __init__(self, sf: _StandardForm):
        self.sf = sf
        self.m = sf.b.size
        self.nu = sum(C.shape[0] for C in sf.c_blk) + sf.c_lp.size + 1
        self.A_flat = [A.reshape(self.m, -1) for A in sf.A_blk]
        self.reduced_accuracy = False

    def A(self, X, x):
        out = self.sf.A_lp @ x
        for Af, Xb in zip(self.A_flat, X):
            out = out + Af @ Xb.ravel()
        return out

    def AT(self, y):
        return [np.einsum("i,ijk->jk", y, A) for A in self.sf.A_blk], self.sf.A_lp.T @ y

    def cdot(self, X, x):
        return sum(float(np.sum(C * Xb)) for C, Xb in zip(self.sf.c_blk, X)) + float(self.sf.c_lp @ x)

    def solve(self, tol: float, max_iters: int):
        sf = self.sf
        X = [np.eye(C.shape[0]) for C in sf.c_blk]
        S = [np.eye(C.shape[0]) for C in sf.c_blk]
        x = np.ones(sf.c_lp.size)
        s = np.ones(sf.c_lp.size)
        y = np.zeros(self.m)
        tau = kappa = 1.0
        b, c_blk, c_lp = sf.b, sf.c_blk, sf.c_lp
        b_norm = 1.0 + _inf_norm(b)
        c_norm = 1.0 + max([np.linalg.norm(C) for C in c_blk] + [_inf_norm(c_lp)])
        a_norm = max(1.0, max([np.linalg.norm(Af, axis=1).max(initial=0.0) for Af in self.A_flat]
                              + [np.abs(sf.A_lp).max(initial=0.0)]))

        best = None
        status = Status.MAX_ITERS
        it = 0
        small_steps = 0
        for it in range(1, max_iters + 1):
            # residuals and convergence tests on the normalised iterate
            AX = self.A(X, x)
            ATy_blk, ATy_lp = self.AT(y)
            r_p = b * tau - AX
            Rd_blk = [C * tau - Ay - Sb for C, Ay, Sb in zip(c_blk, ATy_blk, S)]
            rd_lp = c_lp * tau - ATy_lp - s
            cx = self.cdot(X, x)
            by = float(b @ y)
            r_g = kappa + cx - by
            mu = (sum(float(np.sum(Xb * Sb)) for Xb, Sb in zip(X, S)) + float(x @ s) + tau * kappa) / self.nu

            pres = _inf_norm(r_p) / tau / b_norm
            dres = max([np.linalg.norm(R) for R in Rd_blk] + [_inf_norm(rd_lp)], default=0.0) / tau / c_norm
            pobj, dobj = cx / tau, by / tau
            gap = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
            err = max(pres, dres, gap)
            if best is None or err < best[0]:
                best = (err, [Xb / tau for Xb in X], x / tau, y / tau, it)
            if pres <= tol and dres <= tol and gap <= tol:
                status = Status.OPTIMAL
                break
            if by > 0:
                cert = max([np.linalg.norm(Ay + Sb) for Ay, Sb in zip(ATy_blk, S)]
                           + [_inf_norm(ATy_lp + s)], default=0.0)
                if cert <= tol * a_norm * by and tau < kappa:
                    status = Status.INFEASIBLE
                    break
            if cx < 0:
                cert = _inf_norm(AX)
                if cert <= tol * a_norm * -cx and tau < kappa:
                    status = Status.UNBOUNDED
                    break

            # Schur complement
            try:
                Sinv = [np.linalg.inv(np.linalg.cholesky(Sb)) for Sb in S]
                Sinv = [Li.T @ Li for Li in Sinv]
            except np.linalg.LinAlgError:
                status = Status.NUMERICAL_FAILURE
                break
            d_lp = x / s
            Mat = (sf.A_lp * d_lp) @ sf.A_lp.T
            for A, Af, Xb, Si in zip(sf.A_blk, self.A_flat, X, Sinv):
                T = Xb @ A @ Si
                Mat += Af @ T.transpose(0, 2, 1).reshape(self.m, -1).T
            Mat = _sym(Mat)
            try:
                # regularise relative to each diagonal entry: rows differ in scale by many decades
                dg = np.diag(Mat).copy()
                Mreg = Mat + np.diag(1e-14 * dg + 1e-300)
                fac = sla.cho_factor(Mreg)
                solveM = lambda r: sla.cho_solve(fac, r)  # noqa: E731
            except (np.linalg.LinAlgError, ValueError):
                if not np.all(np.isfinite(Mat)):
                    status = Status.NUMERICAL_FAILURE
                    break
                Mp = np.linalg.pinv(Mat)
                solveM = lambda r: Mp @ r  # noqa: E731

            def D(Z_blk, z_lp):
                return [_sym(Xb @ Zb @ Si) for Xb, Zb, Si in zip(X, Z_blk, Sinv)], d_lp * z_lp

            Dc_blk, Dc_lp = D(c_blk, c_lp)
            u = self.A(Dc_blk, Dc_lp)
            cDc = self.cdot(Dc_blk, Dc_lp)
            q = solveM(u + b)
            bu = b - u
            DRd_blk, DRd_lp = D(Rd_blk, rd_lp)

            def direction(gamma, corr=None):
                eta = 1.0 - gamma
                Rc_blk = [gamma * mu * Si - Xb for Si, Xb in zip(Sinv, X)]
                rc_lp = gamma * mu - x * s
                rtau = gamma * mu - tau * kappa
                if corr is not None:
                    dXa, dSa, dxa, dsa, dta, dka = corr
                    Rc_blk = [Rc - _sym(a @ bb @ Si) for Rc, a, bb, Si in zip(Rc_blk, dXa, dSa, Sinv)]
                    rc_lp = rc_lp - dxa * dsa
                    rtau = rtau - dta * dka
                G_blk = [Rc - eta * DR for Rc, DR in zip(Rc_blk, DRd_blk)]
                g_lp = rc_lp / s - eta * DRd_lp
                r1 = eta * r_p - self.A(G_blk, g_lp)
                r2 = eta * r_g + self.cdot(G_blk, g_lp) + rtau / tau
                pvec = solveM(r1)
                dtau = (r2 - bu @ pvec) / (bu @ q + cDc + kappa / tau)
                dy = pvec + q * dtau
                ATdy_blk, ATdy_lp = self.AT(dy)
                dS = [eta * Rd + C * dtau - Ay for Rd, C, Ay in zip(Rd_blk, c_blk, ATdy_blk)]
                ds = eta * rd_lp + c_lp * dtau - ATdy_lp
                DA_blk, DA_lp = D(ATdy_blk, ATdy_lp)
                dX = [_sym(Gb - Dc * dtau + Da) for Gb, Dc, Da in zip(G_blk, Dc_blk, DA_blk)]
                dx = g_lp - Dc_lp * dtau + DA_lp
                # iterative refinement of the primal equation A dX - b dtau = eta r_p;
                # shifting dy by e keeps the dual and complementarity equations intact
                for _ in range(REFINE_STEPS):
                    e = eta * r_p - self.A(dX, dx) + b * dtau
                    de = solveM(e)
                    Ae_blk, Ae_lp = self.AT(de)
                    De_blk, De_lp = D(Ae_blk, Ae_lp)
                    dX = [_sym(d + De) for d, De in zip(dX, De_blk)]
                    dx = dx + De_lp
                    dS = [d - Ae for d, Ae in zip(dS, Ae_blk)]
                    ds = ds - Ae_lp
                    dy = dy + de
                dkappa = (rtau - kappa * dtau) / tau
                return dX, dS, dx, ds, dy, dtau, dkappa

            def step_to_boundary(dX, dS, dx, ds, dtau, dkappa):
                a = min([_max_step(Xb, d) for Xb, d in zip(X, dX)]
                        + [_max_step(Sb, d) for Sb, d in zip(S, dS)]
                        + [_max_step_lp(x, dx), _max_step_lp(s, ds),
                           _max_step_lp(np.array([tau, kappa]), np.array([dtau, dkappa]))])
                return a

            try:
                dX, dS, dx, ds, dy, dtau, dkappa = direction(0.0)
                a_aff = min(1.0, step_to_boundary(dX, dS, dx, ds, dtau, dkappa))
                mu_aff = (sum(float(np.sum((Xb + a_aff * a) * (Sb + a_aff * bb)))
                              for Xb, a, Sb, bb in zip(X, dX, S, dS))
                          + float((x + a_aff * dx) @ (s + a_aff * ds))
                          + (tau + a_aff * dtau) * (kappa + a_aff * dkappa)) / self.nu
                gamma = min(1.0, max(0.0, mu_aff / mu)) ** 3
                dX, dS, dx, ds, dy, dtau, dkappa = direction(gamma, (dX, dS, dx, ds, dtau, dkappa))
                alpha = min(1.0, STEP_FRACTION * step_to_boundary(dX, dS, dx, ds, dtau, dkappa))
            except np.linalg.LinAlgError:
                status = Status.NUMERICAL_FAILURE
                break
            finite = np.isfinite(dtau) and all(np.all(np.isfinite(d)) for d in dX)
            if not finite or not np.isfinite(alpha) or alpha <= 0:
                status = Status.NUMERICAL_FAILURE
                break
            log.debug("it %d pres %.2e dres %.2e gap %.2e tau %.2e kappa %.2e mu %.2e alpha %.3f",
                      it, pres, dres, gap, tau, kappa, mu, alpha)
            small_steps = small_steps + 1 if alpha < 1e-8 else 0
            if small_steps >= 3:
                status = Status.NUMERICAL_FAILURE
                break

            X = [_sym(Xb + alpha * d) for Xb, d in zip(X, dX)]
            S = [_sym(Sb + alpha * d) for Sb, d in zip(S, dS)]
            x = x + alpha * dx
            s = s + alpha * ds
            y = y + alpha * dy
            tau += alpha * dtau
            kappa += alpha * dkappa
            # the embedding is homogeneous: keep iterates at unit scale
            norm = max(tau + kappa, 1e-300)
            if norm > 1e8 or norm < 1e-8:
                X = [Xb / norm for Xb in X]
                S = [Sb / norm for Sb in S]
                x, s, y = x / norm, s / norm, y / norm
                tau, kappa = tau / norm, kappa / norm

        if status in (Status.INFEASIBLE, Status.UNBOUNDED):
            # certificates: return the ray, not a solution
            return status, [Xb.copy() for Xb in X], x.copy(), y.copy(), it
        if status == Status.OPTIMAL:
            return status, [Xb / tau for Xb in X], x / tau, y / tau, it
        err_best, Xb_best, x_best, y_best, _ = best
        if err_best <= NEAR_OPTIMAL_FACTOR * tol:
            # stalled at the round-off floor of badly scaled rows, but close enough
            self.reduced_accuracy = True
            return Status.OPTIMAL, Xb_best, x_best, y_best, it
        return status, Xb_best, x_best, y_best, it


def solve(problem: SdpProblem, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS) -> SdpSolution:
    """Solve ``problem``; infeasibility and unboundedness come back as a status."""
    if not tol > 0:
        raise InvalidInputError("tol must be > 0")
    sf = _standard_form(problem)
    ipm = _Hsde(sf)
    status, X_real, x_lp, y, iters = ipm.solve(tol, max_iters)
    blocks = [unrealify(Xb) for Xb in X_real]
    nonneg = x_lp[: problem.nonneg_count].copy()
    dual = y * sf.c_scale
    if status in (Status.INFEASIBLE, Status.UNBOUNDED):
        return SdpSolution(status, blocks, nonneg, np.nan, dual, np.nan, np.nan, np.nan, iters)
    sol = SdpSolution(status, blocks, nonneg, problem.objective_value(blocks, nonneg), dual,
                      problem.sign * float(dual @ sf.b), np.nan, np.nan, iters)
    sol.reduced_accuracy = ipm.reduced_accuracy
    res = kkt_residuals(problem, sol)
    sol.duality_gap = res["gap"]
    sol.max_constraint_violation = res["primal_res"]
    sol.residuals = res
    if status == Status.OPTIMAL:
        bound = tol * max(1.0, float(np.max(np.abs(sf.b), initial=0.0)))
        weak = problem.sign * (sol.dual_objective - sol.objective)
        if weak < -10 * tol * (1.0 + abs(sol.objective)):
            log.warning("weak duality violated by %.3g", weak)
        if res["primal_res"] > 10 * NEAR_OPTIMAL_FACTOR * bound:
            log.warning("solver reported optimal with primal residual %.3g", res["primal_res"])
    return sol


def kkt_residuals(problem: SdpProblem, solution: SdpSolution) -> dict:
    """Primal/dual feasibility and gap of ``solution``, recomputed from the problem data.

    primal_res is an absolute violation (rows, PSD cones, nonnegativity);
    dual_res likewise for the dual cone and multiplier signs; gap is relative.
    """
    if len(solution.blocks) != len(problem.block_dims) or len(solution.dual) != len(problem.constraints):
        raise InvalidInputError("solution does not match problem dimensions")
    for X, n in zip(solution.blocks, problem.block_dims):
        if np.shape(X) != (n, n):
            raise InvalidInputError("solution block has wrong shape")
    if np.size(solution.nonneg) != problem.nonneg_count:
        raise InvalidInputError("solution nonneg vector has wrong length")
    X = solution.blocks
    x = np.asarray(solution.nonneg, dtype=float)
    y = np.asarray(solution.dual, dtype=float)
    primal = 0.0
    for con in problem.constraints:
        v = problem.lhs(con, X, x) - con.rhs
        primal = max(primal, abs(v) if con.relation == "==" else max(0.0, v if con.relation == "<=" else -v))
    for Xb in X:
        primal = max(primal, -float(np.linalg.eigvalsh(herm_part(Xb))[0]))
    primal = max(primal, float(np.max(-x, initial=0.0)))

    sign = problem.sign
    dual = 0.0
    for b, n in enumerate(problem.block_dims):
        Z = sign * problem.objective_blocks.get(b, np.zeros((n, n)))
        for yi, con in zip(y, problem.constraints):
            if b in con.blocks:
                Z = Z - yi * con.blocks[b]
        dual = max(dual, -float(np.linalg.eigvalsh(herm_part(Z))[0]))
    for j in range(problem.nonneg_count):
        z = sign * problem.objective_nonneg.get(j, 0.0) - sum(yi * con.nonneg.get(j, 0.0)
                                                              for yi, con in zip(y, problem.constraints))
        dual = max(dual, -z)
    for yi, con in zip(y, problem.constraints):
        if con.relation == ">=":
            dual = max(dual, -yi)
        elif con.relation == "<=":
            dual = max(dual, yi)

    pmin = sign * problem.objective_value(X, x)
    dobj = float(sum(yi * con.rhs for yi, con in zip(y, problem.constraints)))
    gap = abs(pmin - dobj) / (1.0 + abs(pmin) + abs(dobj))
    return {"primal_res": primal, "dual_res": dual, "gap": gap}
