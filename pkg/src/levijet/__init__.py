"""Exact Levi normalization of Poisson jets and Lie algebroids over the rationals."""

__version__ = "0.1.0"

from .ce_complex import (Cochain, HomotopyTables, ModuleKind, ModuleSpec, ce_differential,
                         cohomology_table, verify_homotopy_identity)
from .jets import (JetBivector, JetDiffeo, JetPoly, JetSpace, JetVectorField, compose,
                   invert, poisson_bracket, pushforward, schouten_jacobiator)
from .levi import (LeviProblem, NormalizeConfig, NormalizeResult, ProblemError, Unconverged,
                   algebroid_to_poisson, normalize, perturbed_algebroid, perturbed_problem,
                   transformation_algebroid)
from .lie_core import (StructureData, casimir_element, casimir_operator, killing_form, so3,
                       so3_semidirect_r3, validate_structure)
from .nash_moser import Mode, SCIInstance, audit_schedule, run
from .schedule import (Variant, check_sci_axioms, majorant_norm, plan_constants, schedule,
                       smoothing, spectral_norm, validate_constants)
