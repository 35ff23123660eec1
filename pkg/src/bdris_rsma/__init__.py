"""Meta-learned sum-rate optimization for a BD-RIS-assisted two-user uplink.

The package couples a small reverse-mode autodiff engine with a
learning-to-optimize loop: three gradient-fed networks propose updates
for receive beamformers, transmit powers and the scattering matrix of a
beyond-diagonal reconfigurable surface, and are themselves trained by
backpropagating a rate-plus-penalty meta loss through the unrolled
updates. Baselines, experiment sweeps and a CLI make the comparisons
reproducible end to end.
"""

from .autodiff import DivergenceError, Var, backward, grad
from .baselines import (BaselineResult, BaselineScheme, diagonal_variant,
                        grid_oracle_tiny, matched_filter_solution,
                        random_phases_baseline, run_diagonal_baseline)
from .channel import (ChannelSet, FadingParams, NodeGeometry, dbm_to_watt,
                      generate_channel_set, path_loss, steering_vector)
from .experiments import (ExperimentConfig, OracleRow, ResultRow, SweepResult,
                          ConfigError, emit_oracle_results, emit_results,
                          format_config, load_config, parse_config_text,
                          rescore_archive, run_oracle_comparison, run_sweep,
                          write_config)
from .metaopt import (EpochLog, MetaConfig, MetaLossBreakdown, MetaNetworks,
                      RunConfig, TrainResult, beamformer_step, init_networks,
                      initial_solution, meta_loss, phase_regulator, phase_step,
                      power_step, run_meta_training)
from .nets import HIDDEN_UNITS, AdamState, Mlp, TrainedOptimizer, adam_step
from .sysmodel import (Architecture, ConstraintResiduals, MagnitudeMode,
                       ScatteringMatrix, Solution, SystemConfig,
                       constraint_residuals, mac_sum_capacity_bound,
                       project_solution, random_symmetric_unitary, score_solution,
                       stream_rates, sum_rate, symmetric_unitary_from_exponent,
                       takagi, takagi_project)

__version__ = "0.1.0"
