"""Pair dispersion and passive scalar experiments in synthetic turbulence."""

import json
import os

from ._core import (
    ConfigError,
    ConstraintViolation,
    FitError,
    KraichnanOracle,
    ParameterError,
    SpectralField,
    SpectrumParams,
    __version__,
    c_alpha,
    exponents,
    fit_power_law,
    gamma,
    make_params,
    make_params_direct,
    preset_ini,
    presets,
    regime,
    simulate_limit_pairs,
    simulate_pairs,
    synthesize,
)
from . import _core


def validate(ini):
    """Regime report and constraint audit of an INI config, as a dict."""
    return json.loads(_core.validate_json(ini))


def run(ini, out_dir, threads=0, gnuplot=False):
    """Execute a config and return its run record."""
    return json.loads(_core.run_json(ini, os.fspath(out_dir), threads, gnuplot))


__all__ = [name for name in dir() if not name.startswith("_")]
