import numpy as np
import pytest

from irs_isac.channel import AlgoConfig, ScenarioConfig, build_channels

# small instance used across the relaxation / AO tests
DESK = dict(M=4, N=12, K=2, L=3, Q=1, gamma=10.0)


def desk_config(**kw) -> ScenarioConfig:
    algo = kw.pop("algo", AlgoConfig())
    return ScenarioConfig(**{**DESK, **kw}, algo=algo)


def desk_instance(seed: int, **kw):
    config = desk_config(**kw)
    return config, build_channels(config, np.random.default_rng(seed))


def rand_herm(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (A + A.conj().T) / 2


def rand_psd(rng, n, rank=None):
    rank = n if rank is None else rank
    F = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    return F @ F.conj().T


def unit_phase(rng, n):
    return np.exp(1j * rng.uniform(0, 2 * np.pi, n))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance lines, printed together at the end of the session
ACCEPTANCE = []


def report(number: int, title: str, ok: bool, detail: str):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    ACCEPTANCE.append((number, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
