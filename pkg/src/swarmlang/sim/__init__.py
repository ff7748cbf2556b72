from .config import SimulationConfig, Topology, derive_seed, place_robots
from .experiments import (BUILDERS, Experiment, barrier_pass_steps,
                          build_barrier, build_consensus, build_custom,
                          build_gradient, build_target_select,
                          consensus_expected_step, gradient_fixpoint)
from .network import deliver
from .runner import RunContext, RunResult, StepMetrics, run
from .sweep import experiment_sweep, summarize, write_outputs

__all__ = [
    "SimulationConfig", "Topology", "derive_seed", "place_robots",
    "BUILDERS", "Experiment", "barrier_pass_steps", "build_barrier",
    "build_consensus", "build_custom", "build_gradient",
    "build_target_select", "consensus_expected_step", "gradient_fixpoint",
    "deliver", "RunContext", "RunResult", "StepMetrics", "run",
    "experiment_sweep", "summarize", "write_outputs",
]
