"""
omt-lab: Monte Carlo lab for the open mapping theorem.

Planar Brownian motion stopped on circles, pushed through nonconstant
analytic maps with the time change sigma(t) = int |f'(B_s)|^2 ds, and
used to estimate hitting probabilities and image-disk coverage.
"""

__version__ = "0.1.0"

from .analytic import AnalyticFn, CircleSpec, deriv, evaluate, format_expression, parse_expression
from .brownian import BmPath, RngStream, SamplerConfig, sample_path_until_exit
from .experiment import DomainSpec, OmtConfig, OmtReport, containment_check, run_experiment
from .settings import LabSettings, get_settings

__all__ = [
    "__version__",
    "AnalyticFn",
    "BmPath",
    "CircleSpec",
    "DomainSpec",
    "LabSettings",
    "OmtConfig",
    "OmtReport",
    "RngStream",
    "SamplerConfig",
    "containment_check",
    "deriv",
    "evaluate",
    "format_expression",
    "get_settings",
    "parse_expression",
    "run_experiment",
    "sample_path_until_exit",
]
