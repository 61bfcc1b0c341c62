"""Interferometric efficacy tests of continuous-variable teleporters.

Fields are tracked as linear (Bogoliubov) expressions in mode operators,
moments are evaluated exactly on sparse Fock superpositions, and an
independent truncated dense simulation cross-checks the results.
"""
from .fock import FockState, expect_number, expect_total_number
from .interferometer import (
    Coherent,
    MzConfig,
    NbarInput,
    SinglePhoton,
    VisibilityReport,
    build_mz,
    counts_closed_form,
    lambda_max,
    lambda_max_general,
    lambda_max_lossy,
    mz_visibility,
    optimize_gain_numeric,
    vmax_classical,
)
from .modes import FieldExpression, ModeId, ModeRegistry, beamsplitter, identity_expr, linear_combine
from .teleporter import TeleporterParams, gain_from_squeezing, lambda_opt, quantum_teleport

__version__ = "0.1.0"

__all__ = [
    "Coherent",
    "FieldExpression",
    "FockState",
    "ModeId",
    "ModeRegistry",
    "MzConfig",
    "NbarInput",
    "SinglePhoton",
    "TeleporterParams",
    "VisibilityReport",
    "beamsplitter",
    "build_mz",
    "counts_closed_form",
    "expect_number",
    "expect_total_number",
    "gain_from_squeezing",
    "identity_expr",
    "lambda_max",
    "lambda_max_general",
    "lambda_max_lossy",
    "lambda_opt",
    "linear_combine",
    "mz_visibility",
    "optimize_gain_numeric",
    "quantum_teleport",
    "vmax_classical",
]
