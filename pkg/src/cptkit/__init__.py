"""Unitary CPT operators on finite spin spaces and CPT frameness as a resource."""

from . import alignment, cpt, dfs, linalg, momentum, resource, spin
from .cpt import PhaseConvention, build_C, build_CPT, build_PT, cpt_eigensectors, klein_group_report
from .errors import (
    CapacityError, ClosureError, CptkitError, DegenerateDemoError, DomainError, GridLookupError,
    PreconditionError, ShapeError, StructureError, UnsupportedOperationError, ValidationError,
)
from .report import Check, Report
from .spin import BasisLabel, SpinSpace, massive_spin_s_space, massless_allowed_states, parse_spin

__version__ = "0.1.0"
