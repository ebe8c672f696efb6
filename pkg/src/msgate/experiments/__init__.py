"""Virtual experiments: pulse sequences, scans, fits and error budgets."""

from .errors import coupling_imbalance_error, heating_error
from .fitting import (FitError, FitResult, fit_gate_decay, fit_nbar, fit_quadratic_detuning,
                      fit_sinusoid, golden_section)
from .scans import COLUMNS, ScanSpec, gate_phase, multi_gate, ramsey, resample, run_scan
from .sequences import (bell_fidelity, bell_fidelity_rho, carrier_pulse, depolarize, ket,
                        parity_amplitude_rho, parity_signal, populations_binned,
                        prepare_downup, prepare_downup_rho)
from .simulation import (Fock, GateOutcome, calibrate_omega, early_oscillation, simulate_gate,
                         thermal_quantile_levels)

__all__ = [
    "COLUMNS", "FitError", "FitResult", "Fock", "GateOutcome", "ScanSpec",
    "bell_fidelity", "bell_fidelity_rho", "calibrate_omega", "carrier_pulse",
    "coupling_imbalance_error", "depolarize", "early_oscillation", "fit_gate_decay",
    "fit_nbar", "fit_quadratic_detuning", "fit_sinusoid", "gate_phase", "golden_section",
    "heating_error", "ket", "multi_gate", "parity_amplitude_rho", "parity_signal",
    "populations_binned", "prepare_downup", "prepare_downup_rho", "ramsey", "resample",
    "run_scan", "simulate_gate", "thermal_quantile_levels",
]
