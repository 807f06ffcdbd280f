"""Multi-beam RIS beam-training simulator."""

from .array_geometry import (hadamard, kron, planar_steering, ris_response_q, steering_h,
                             steering_v, wrap_mod2)
from .baselines import (OraclePair, binary_search, bs_search, cs_search, exhaustive_search,
                        optimal_direction)
from .channel import (CascadeLink, ChannelRealization, ScenarioConfig, measure_training_snr,
                      realize, received_snr_factored, received_snr_full, sample_rician)
from .codebook import (Codebook, DirectionGrid, build_codebook, build_grid, intra_set_distance,
                       multibeam_vector, single_beam)
from .experiment import (ExperimentPlan, SweepReport, achievable_rate, gamma_for_snr,
                         run_monte_carlo, success_rate)
from .search import (SearchConfig, SearchResult, SearchStateError, coarse_round,
                     fine_candidates, fine_round, first_round, hierarchical_search, rank_bins,
                     run_ris_training, run_user_training, training_symbol_budget)

__version__ = "0.1.0"
