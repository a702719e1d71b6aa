"""Entanglement localization from W-like states with weak measurements.

A small density-matrix simulator for three-qubit W-like states, postselected
weak and reversal measurements, single-qubit noise channels and the Wootters
concurrence, with closed-form cross-checks and sweep/optimization tools.
"""

from ._kernels import BACKEND, HAVE_NUMBA
from .channels import amplitude_damping, depolarizing, make_channel, phase_damping
from .entanglement import (
    concurrence,
    concurrence_of_assistance,
    concurrence_shortcut,
    concurrence_values,
)
from .explorer import (
    Axis,
    SweepSpec,
    figure_presets,
    optimize_reversal,
    pareto_frontier,
    sweep,
)
from .measurements import apply_postselected, projector, reversal_meas, weak_meas
from .protocols import ProtocolParams, evaluate_batch, run, verify_closed_forms
from .states import DensityMatrix, WLikeCoefficients, resolve_initial, w_like

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_NUMBA",
    "Axis",
    "DensityMatrix",
    "ProtocolParams",
    "SweepSpec",
    "WLikeCoefficients",
    "amplitude_damping",
    "apply_postselected",
    "concurrence",
    "concurrence_of_assistance",
    "concurrence_shortcut",
    "concurrence_values",
    "depolarizing",
    "evaluate_batch",
    "figure_presets",
    "make_channel",
    "optimize_reversal",
    "pareto_frontier",
    "phase_damping",
    "projector",
    "resolve_initial",
    "reversal_meas",
    "run",
    "sweep",
    "verify_closed_forms",
    "w_like",
    "weak_meas",
]
