"""Availability and PFD of MooN safety systems subject to partial and full proof tests."""

from .analytic import (
    APPROXIMATE,
    EXACT,
    EvaluationMode,
    PFDReport,
    availability_curve,
    component_availability,
    max_unavailability,
    pfd_average,
    pfd_average_no_partial,
    pfd_average_periodic,
    pfd_interval,
    sil_band,
    system_availability,
)
from .combinatorics import binomial, s_coefficients
from .estimate import (
    TestObservations,
    estimate,
    estimate_efficiency,
    estimate_lambda,
    lambda_confidence_interval,
    observe_probability,
)
from .model import (
    SystemSpec,
    TestPolicy,
    TestSchedule,
    TimeUnit,
    ValidationError,
    convert_time,
    periodic_schedule,
    validate_system,
)
from .optimize import OptimizedPolicy, evaluate_candidate, optimize_schedule
from .simulate import SimulationConfig, SimulationResult, simulate_availability, simulate_pfd

__version__ = "0.1.0"
