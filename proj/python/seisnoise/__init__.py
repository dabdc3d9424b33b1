"""Statistical characterization of seismic background noise."""

import json

import numpy as np

from ._core import (
    ArgumentError,
    ArimaModel,
    DegenerateInputError,
    EstimationError,
    FetchError,
    GarchModel,
    ParseError,
    PsrOutcome,
    TestOutcome,
    aaft_surrogate,
    adf_test,
    arch_lm_test,
    correlation_dimension,
    determine_d,
    fit_arima,
    fit_garch,
    ft_surrogate,
    pp_test,
    psr_test,
    shapiro_wilk,
    whiteness_test,
)
from ._core import characterize_json as _characterize_json
from ._core import simulate as _simulate

__version__ = "0.1.0"


def characterize(x, sample_rate=1.0, config="", seed=None):
    """Run the full characterization pipeline and return the report as a dict.

    `config` uses the same key = value syntax as the command-line --config file.
    """
    return json.loads(_characterize_json(np.asarray(x, dtype=float), sample_rate, config, seed))


def simulate(spec):
    """Generate a process from key = value spec text. Returns (values, sample_rate)."""
    values, rate = _simulate(spec)
    return np.asarray(values), rate
