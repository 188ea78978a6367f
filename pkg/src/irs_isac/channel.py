"""Scenario geometry, Rician links and effective BS->{CU, target, clutter} channels.

Arrays convention: both the BS and the IRS are ULAs laid along the y axis, so
a point p seen from an array centred at c has sin(theta) = (p - c)_y / |p - c|.
The IRS reflection vector ``phi`` holds the diagonal of Phi, and every effective
channel uses Phi^H, e.g. h_CU = G^H Phi^H h_iu + h_bu.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .matrix import InvalidInputError, complex_normal

LINKS = ("irs_clutter", "irs_cu", "bs_irs", "bs_cu", "bs_clutter")
DEFAULT_EXPONENTS = {
    "irs_clutter": 2.5,
    "irs_cu": 2.5,
    "bs_irs": 2.2,
    "bs_cu": 3.5,
    "bs_clutter": 3.5,
}
UNIT_MODULUS_TOL = 1e-9
INIT_STRATEGIES = ("random", "zero", "sensing")


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def dbm2watt(x):
    return db2lin(x) * 1e-3


def default_target_angles(L: int) -> tuple:
    """Evenly spread targets over [-60, 60] degrees (L=5 gives -60,-30,0,30,60)."""
    if L == 1:
        return (0.0,)
    return tuple(np.deg2rad(np.linspace(-60.0, 60.0, L)))


@dataclass(frozen=True)
class AlgoConfig:
    max_iters: int = 50
    eps: float = 1e-6
    relative_stop: bool = False
    rand_trials: int = 20000
    rank_tol: float = 1e-4
    sdp_tol: float = 1e-8
    sdp_max_iters: int = 200
    init: str = "sensing"
    lookahead: int = 4

    def __post_init__(self):
        if self.max_iters < 1:
            raise InvalidInputError("algo.max_iters must be >= 1")
        if not self.eps > 0:
            raise InvalidInputError("algo.eps must be > 0")
        if self.rand_trials < 1:
            raise InvalidInputError("algo.rand_trials must be >= 1")
        if not 0 < self.rank_tol < 1:
            raise InvalidInputError("algo.rank_tol must lie in (0, 1)")
        if not self.sdp_tol > 0:
            raise InvalidInputError("algo.sdp_tol must be > 0")
        if self.lookahead < 0:
            raise InvalidInputError("algo.lookahead must be >= 0")
        if self.init not in INIT_STRATEGIES:
            raise InvalidInputError(f"algo.init must be one of {INIT_STRATEGIES}")


@dataclass(frozen=True)
class ScenarioConfig:
    """All scalar parameters of one scenario, in linear units and radians."""

    M: int = 8
    N: int = 64
    K: int = 4
    L: int = 5
    Q: int = 2
    P0: float = 0.5
    sigma2: float | tuple = 1e-11
    gamma: float | tuple = 10.0
    eta: float | tuple = 1e-7
    xi: float = np.inf
    target_angles: tuple | None = None
    d_irs_over_lambda: float = 0.5
    d_bs_over_lambda: float = 0.5
    rician_factor: float = 0.5
    pathloss_exponents: dict = field(default_factory=lambda: dict(DEFAULT_EXPONENTS))
    K0_dB: float = -30.0
    d0: float = 1.0
    bs_xy: tuple = (0.0, 0.0)
    irs_xy: tuple = (20.0, 2.0)
    cu_distance: float = 10.0
    clutter_distance_range: tuple = (12.0, 15.0)
    cu_type: str = "I"
    seed: int = 0
    algo: AlgoConfig = field(default_factory=AlgoConfig)

    def __post_init__(self):
        if self.target_angles is None:
            object.__setattr__(self, "target_angles", default_target_angles(self.L))
        object.__setattr__(self, "target_angles", tuple(float(a) for a in self.target_angles))
        self.validate()

    def validate(self):
        if self.M < 2 or self.N < 1:
            raise InvalidInputError("system.M must be > 1 and system.N >= 1")
        if self.K < 1:
            raise InvalidInputError("system.K must be >= 1")
        if self.L < 1:
            raise InvalidInputError("system.L must be >= 1")
        if self.Q < 0:
            raise InvalidInputError("system.Q must be >= 0")
        if not self.P0 > 0:
            raise InvalidInputError("power.P0 must be > 0")
        for name, values, count in (("sigma2", self.sigma2, self.K), ("gamma", self.gamma, self.K),
                                    ("eta", self.eta, self.Q)):
            arr = np.atleast_1d(np.asarray(values, dtype=float))
            if arr.size not in (1, count) and count > 0:
                raise InvalidInputError(f"{name} must be a scalar or have {count} entries")
            if not np.all(arr > 0):
                raise InvalidInputError(f"{name} must be > 0")
        if np.isnan(self.xi):
            raise InvalidInputError("power.xi must be a number or +inf")
        if len(self.target_angles) != self.L:
            raise InvalidInputError(f"targets.angles must have L={self.L} entries")
        if not all(-np.pi / 2 < a < np.pi / 2 for a in self.target_angles):
            raise InvalidInputError("target angles must lie strictly inside (-90, 90) degrees")
        if self.cu_type not in ("I", "II"):
            raise InvalidInputError("algo.cu_type must be 'I' or 'II'")
        if not (self.d0 > 0 and self.cu_distance > 0):
            raise InvalidInputError("distances must be > 0")
        lo, hi = self.clutter_distance_range
        if not 0 < lo <= hi:
            raise InvalidInputError("clutter distance range must satisfy 0 < lo <= hi")
        if np.hypot(*np.subtract(self.irs_xy, self.bs_xy)) <= 0:
            raise InvalidInputError("BS and IRS must not coincide")
        if self.rician_factor < 0:
            raise InvalidInputError("channel.rician_factor must be >= 0")
        missing = set(LINKS) - set(self.pathloss_exponents)
        if missing:
            raise InvalidInputError(f"missing path-loss exponents: {sorted(missing)}")

    @property
    def gammas(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.gamma, dtype=float), (self.K,)).copy()

    @property
    def noise(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.sigma2, dtype=float), (self.K,)).copy()

    @property
    def etas(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.eta, dtype=float), (self.Q,)).copy()

    def with_(self, **changes) -> "ScenarioConfig":
        if "L" in changes and "target_angles" not in changes:
            changes["target_angles"] = default_target_angles(changes["L"])
        return replace(self, **changes)


@dataclass(frozen=True)
class ChannelSet:
    """Per-realisation channels; per-user vectors are stored as rows."""

    G: np.ndarray  # N x M, BS -> IRS
    h_bu: np.ndarray  # K x M
    h_iu: np.ndarray  # K x N
    g_bc: np.ndarray  # Q x M
    g_ic: np.ndarray  # Q x N
    a: np.ndarray  # L x N, IRS steering vector per target
    cu_xy: np.ndarray = None
    clutter_xy: np.ndarray = None

    @property
    def M(self) -> int:
        return self.G.shape[1]

    @property
    def N(self) -> int:
        return self.G.shape[0]

    def without_irs(self) -> "ChannelSet":
        """Same realisation with every IRS-reflected path removed."""
        return replace(self, G=np.zeros_like(self.G))


def ula_response(sin_theta: float, n: int, ratio: float) -> np.ndarray:
    return np.exp(1j * 2 * np.pi * ratio * np.arange(n) * sin_theta)


def steering_vector(theta: float, N: int, ratio: float = 0.5) -> np.ndarray:
    """IRS steering vector: entry n is exp(j 2 pi ratio n sin(theta))."""
    if not -np.pi / 2 < theta < np.pi / 2:
        raise InvalidInputError(f"theta={theta} outside (-pi/2, pi/2)")
    return ula_response(np.sin(theta), N, ratio)


def path_loss(d: float, alpha: float, K0_dB: float = -30.0, d0: float = 1.0) -> float:
    if not (d > 0 and d0 > 0):
        raise InvalidInputError("distances must be positive")
    return float(10.0 ** (K0_dB / 10.0) * (d / d0) ** (-alpha))


def rician_channel(rows: int, cols: int, rician_factor: float, gain: float, los, rng) -> np.ndarray:
    los = np.asarray(los, dtype=complex)
    if los.shape != (rows, cols):
        raise InvalidInputError(f"LoS component has shape {los.shape}, expected {(rows, cols)}")
    if gain < 0:
        raise InvalidInputError("gain must be >= 0")
    kappa = rician_factor
    nlos = complex_normal(rng, (rows, cols))
    return np.sqrt(gain) * (np.sqrt(kappa / (1 + kappa)) * los + np.sqrt(1 / (1 + kappa)) * nlos)


def _sin_from(origin, point) -> float:
    d = np.subtract(point, origin)
    return float(d[1] / np.hypot(*d))


def _distance(p, q) -> float:
    return float(np.hypot(*np.subtract(p, q)))


def build_channels(config: ScenarioConfig, rng: np.random.Generator) -> ChannelSet:
    """Draw one channel realisation for ``config``.

    Draw order (fixed for reproducibility): CU angles, clutter distances and
    angles, then G, h_bu, h_iu, g_bc, g_ic.
    """
    c = config
    bs, irs = np.asarray(c.bs_xy, float), np.asarray(c.irs_xy, float)
    ex = c.pathloss_exponents

    def pl(d, link):
        return path_loss(d, ex[link], c.K0_dB, c.d0)

    def bs_arr(p):
        return ula_response(_sin_from(bs, p), c.M, c.d_bs_over_lambda)

    def irs_arr(p):
        return ula_response(_sin_from(irs, p), c.N, c.d_irs_over_lambda)

    cu_ang = rng.uniform(0.0, 2 * np.pi, c.K)
    cu_xy = bs + c.cu_distance * np.column_stack([np.cos(cu_ang), np.sin(cu_ang)])
    lo, hi = c.clutter_distance_range
    cl_d = rng.uniform(lo, hi, c.Q)
    cl_ang = rng.uniform(-np.pi / 2, np.pi / 2, c.Q)
    clutter_xy = irs + cl_d[:, None] * np.column_stack([np.cos(cl_ang), np.sin(cl_ang)])

    kappa = c.rician_factor
    G = rician_channel(c.N, c.M, kappa, pl(_distance(bs, irs), "bs_irs"),
                       np.outer(irs_arr(bs), bs_arr(irs).conj()), rng)
    h_bu = np.array([rician_channel(c.M, 1, kappa, pl(_distance(bs, p), "bs_cu"), bs_arr(p)[:, None], rng)[:, 0]
                     for p in cu_xy]).reshape(c.K, c.M)
    h_iu = np.array([rician_channel(c.N, 1, kappa, pl(_distance(irs, p), "irs_cu"), irs_arr(p)[:, None], rng)[:, 0]
                     for p in cu_xy]).reshape(c.K, c.N)
    g_bc = np.array([rician_channel(c.M, 1, kappa, pl(_distance(bs, p), "bs_clutter"), bs_arr(p)[:, None], rng)[:, 0]
                     for p in clutter_xy]).reshape(c.Q, c.M)
    g_ic = np.array([rician_channel(c.N, 1, kappa, pl(_distance(irs, p), "irs_clutter"), irs_arr(p)[:, None], rng)[:, 0]
                     for p in clutter_xy]).reshape(c.Q, c.N)
    a = np.array([steering_vector(t, c.N, c.d_irs_over_lambda) for t in c.target_angles])
    return ChannelSet(G=G, h_bu=h_bu, h_iu=h_iu, g_bc=g_bc, g_ic=g_ic, a=a, cu_xy=cu_xy, clutter_xy=clutter_xy)


def check_phase(phi, N: int | None = None) -> np.ndarray:
    phi = np.asarray(phi, dtype=complex)
    if phi.ndim != 1 or (N is not None and phi.size != N):
        raise InvalidInputError(f"phi must be a length-{N} vector")
    if np.max(np.abs(np.abs(phi) - 1.0), initial=0.0) > UNIT_MODULUS_TOL:
        raise InvalidInputError("phi entries must have unit modulus")
    return phi


def _cascade(G, phi, v) -> np.ndarray:
    # G^H Phi^H v  (v may be a vector or a stack of row vectors)
    return (np.conj(phi) * v) @ G.conj()


def effective_cu_channel(G, phi, h_iu, h_bu) -> np.ndarray:
    G = np.asarray(G)
    phi = check_phase(phi, G.shape[0])
    return _cascade(G, phi, np.asarray(h_iu)) + np.asarray(h_bu)


def effective_target_channel(G, phi, theta: float, ratio: float = 0.5) -> np.ndarray:
    G = np.asarray(G)
    phi = check_phase(phi, G.shape[0])
    return _cascade(G, phi, steering_vector(theta, G.shape[0], ratio))


def effective_clutter_channel(G, phi, g_ic, g_bc) -> np.ndarray:
    return effective_cu_channel(G, phi, g_ic, g_bc)


def effective_channels(channels: ChannelSet, phi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All effective channels at once: (h_CU K x M, h_target L x M, g_clutter Q x M)."""
    G = channels.G
    phi = check_phase(phi, G.shape[0])
    h_cu = _cascade(G, phi, channels.h_iu) + channels.h_bu
    h_t = _cascade(G, phi, channels.a)
    g_cl = _cascade(G, phi, channels.g_ic) + channels.g_bc
    return h_cu, h_t, g_cl
