"""Satellite reliability, availability and maintainability models."""

from .experiments import load_manifest, parse_sweep, run_experiment_sweep, run_manifest
from .models import build_constellation_model, build_single_satellite_model, calibrate_interruptions
from .params import RamParams, derive_rates, reliability_curve

__all__ = [
    "RamParams",
    "build_constellation_model",
    "build_single_satellite_model",
    "calibrate_interruptions",
    "derive_rates",
    "load_manifest",
    "parse_sweep",
    "reliability_curve",
    "run_experiment_sweep",
    "run_manifest",
]
