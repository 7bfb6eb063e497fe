"""
Fractional-order SEIPAHRF epidemic model with optimal vaccination and
preventive-measure control.

Submodules: ``solver`` (Caputo PECE integrator, Mittag-Leffler function),
``model`` (compartmental system and R0), ``sensitivity``, ``fitting``,
``control`` (forward-backward sweep), ``costeff``, ``config`` and ``cli``.
"""

from .control import (ControlSchedule, CostWeights, SweepConfig, SweepResult,
                      forward_backward_sweep)
from .costeff import EffectivenessReport, effectiveness_report
from .errors import (ConfigError, DataError, FracovidError, NumericalError, ValidationError)
from .fitting import CaseSeries, FitConfig, FitResult, fit, load_case_data
from .model import (COMPARTMENTS, CompartmentState, ContactReductionSchedule, ModelParams,
                    basic_reproduction_number, controlled_r0, portugal_initial_conditions,
                    uncontrolled_field)
from .sensitivity import sensitivity_index, sensitivity_vs_alpha
from .solver import TimeGrid, Trajectory, mittag_leffler, pece_solve, pece_solve_reversed

__version__ = "0.1.0"

__all__ = [
    "COMPARTMENTS", "CaseSeries", "CompartmentState", "ConfigError", "ContactReductionSchedule",
    "ControlSchedule", "CostWeights", "DataError", "EffectivenessReport", "FitConfig",
    "FitResult", "FracovidError", "ModelParams", "NumericalError", "SweepConfig", "SweepResult",
    "TimeGrid", "Trajectory", "ValidationError", "basic_reproduction_number", "controlled_r0",
    "effectiveness_report", "fit", "forward_backward_sweep", "load_case_data", "mittag_leffler",
    "pece_solve", "pece_solve_reversed", "portugal_initial_conditions", "sensitivity_index",
    "sensitivity_vs_alpha", "uncontrolled_field",
]
