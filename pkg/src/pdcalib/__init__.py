"""Event-level twin-beam photocurrent simulation and detector calibration."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .calibration import (BudgetReport, EtaEstimate, GainStats,
                          estimate_eta_spectral, estimate_eta_time_domain,
                          excess_noise_factor, uncertainty_budget)
from .config import RunConfig, default_config_text, load_config
from .correlator import (CorrelationEstimate, SpectrumEstimate, autocorrelation,
                         cross_power_spectrum, crosscorrelation, mean_current,
                         noise_power_spectrum)
from .detector import (CurrentTrace, DetectionRecord, DetectorParams, GainModel,
                       PulseShape, apply_nonlinearity, detect,
                       pulse_autoconvolution, pulse_value, stationary_segment,
                       synthesize_current)
from .errors import ConfigurationError, EstimationError, InputError, PdcalibError
from .pipeline import PipelineResult, run_pipeline
from .streams import (PairedEventStream, SourceConfig, gen_coherent,
                      gen_spontaneous, gen_stimulated, generate)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND", "__version__",
    "PdcalibError", "ConfigurationError", "InputError", "EstimationError",
    "SourceConfig", "PairedEventStream", "gen_coherent", "gen_spontaneous",
    "gen_stimulated", "generate",
    "PulseShape", "GainModel", "DetectorParams", "DetectionRecord",
    "CurrentTrace", "detect", "pulse_value", "pulse_autoconvolution",
    "synthesize_current", "apply_nonlinearity", "stationary_segment",
    "CorrelationEstimate", "SpectrumEstimate", "mean_current",
    "autocorrelation", "crosscorrelation", "noise_power_spectrum",
    "cross_power_spectrum",
    "GainStats", "EtaEstimate", "BudgetReport", "estimate_eta_time_domain",
    "estimate_eta_spectral", "excess_noise_factor", "uncertainty_budget",
    "RunConfig", "load_config", "default_config_text",
    "PipelineResult", "run_pipeline",
]
