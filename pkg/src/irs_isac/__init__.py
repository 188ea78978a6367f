"""Max-min sensing beampattern design for IRS-assisted ISAC via SDR and alternating optimisation."""

from .altopt import (SCHEMES, RunRecord, algorithm1, algorithm2, audit, benchmark_info_beamforming,
                     benchmark_no_irs, benchmark_random_phase, benchmark_separate_design, run_scheme)
from .channel import AlgoConfig, ChannelSet, ScenarioConfig, build_channels, effective_channels
from .sdp import Constraint, SdpProblem, SdpSolution, Status, solve

__version__ = "0.1.0"
