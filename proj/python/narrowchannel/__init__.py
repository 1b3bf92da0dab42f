"""Diffusion in narrow random channels: geometry, metric-graph limit, transport speed."""

from narrowchannel._core import (
    ChannelSpec,
    MetricGraph,
    build_graph,
    compare_to_graph,
    constant_channel,
    estimate_K,
    exit_time_quadrature,
    inverse_speed,
    mean_exit_time,
    run_experiment,
    run_sde,
    sample_environment,
    solve_exit_bvp,
    wing_moments,
    wing_occupation,
    wing_time,
    __version__,
)

__all__ = [
    "ChannelSpec",
    "MetricGraph",
    "build_graph",
    "compare_to_graph",
    "constant_channel",
    "estimate_K",
    "exit_time_quadrature",
    "inverse_speed",
    "mean_exit_time",
    "run_experiment",
    "run_sde",
    "sample_environment",
    "solve_exit_bvp",
    "wing_moments",
    "wing_occupation",
    "wing_time",
    "__version__",
]
