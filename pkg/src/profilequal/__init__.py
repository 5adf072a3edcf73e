"""Service-profile based service quality for institutional eLibraries."""

__version__ = "0.1.0"

from .credit_model import (
    CreditParams,
    ServedCounts,
    credit_extrema,
    credit_quality,
    credit_sensitivity,
    credit_variation,
)
from .delay_model import (
    DelayParams,
    average_quality,
    delay_quality,
    delay_sensitivity,
    delay_variation,
)
from .ingest import LogFormat, UnservedPolicy, classify, classify_window, derive_tau, parse_log
from .profile_model import ServiceOutcome, ServiceProfileRecord, validate_record
