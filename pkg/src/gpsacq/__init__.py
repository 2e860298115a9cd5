"""GPS C/A acquisition: exhaustive matched filtering vs compressive sampling."""

from .channel import (ChannelRealization, GridSpec, SampledSignal,
                      draw_channel, pulse_shape, spread_waveform,
                      synthesize_received)
from .codes import (CaCode, CodeFamily, code_family, cross_correlation,
                    cross_correlation_all_lags, cross_spectral_error,
                    generate_ca_code, max_cross_correlation)
from .config import (SimConfig, SweepConfig, load_sim_config,
                     load_sweep_config, parse_sim_config, parse_sweep_config)
from .experiments import (TrialRecord, bench, build_context,
                          complexity_report, rmse_aggregate, run_trial, sweep)
from .frontend import (CompressedMeasurements, SensingMatrix,
                       build_kernels, build_sensing_matrix, compress,
                       load_sensing_matrix, save_sensing_matrix)
from .mf import (AcquisitionResult, CorrelationTensor, SatelliteDetection,
                 accumulate, correlate_bank, gram_matrix, select_paths)
from .opcount import OpCounter
from .recovery import (MmvProblem, SupportEstimate, ctf_reduce, omp_mmv,
                       omp_smv, raw_problem, rembo, solve_problem,
                       support_to_acquisition)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
