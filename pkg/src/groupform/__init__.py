"""Spatial group formation games: utilities, equilibrium dynamics and verification."""
from .dynamics import DeviationPolicy, Mode, run_dynamics
from .errors import (ConstructionError, GeometryError, GroupFormationError, InstanceFormatError,
                     ModelError, PreconditionError)
from .geometry import CoverageKind, convex_hull, coverage, diameter, hull_measure
from .model import (NEW_GROUP, AffineTradeoff, Game, GForm, Instance, NoPenalty, Partition,
                    PowerScaled, Ratio, ResourceScaled, UtilitySpec)
from .psae import psae_bruteforce, psae_diameter_fast
from .realize import DagInput, realize_dag
from .structure import assert_structure_theorems, encroachment_graph
from .verify import Status, check_ae, check_sae, enumerate_equilibria

__version__ = "0.1.0"

__all__ = [
    "AffineTradeoff", "ConstructionError", "CoverageKind", "DagInput", "DeviationPolicy", "GForm",
    "Game", "GeometryError", "GroupFormationError", "Instance", "InstanceFormatError", "Mode",
    "ModelError", "NEW_GROUP", "NoPenalty", "Partition", "PowerScaled", "PreconditionError",
    "Ratio", "ResourceScaled", "Status", "UtilitySpec", "assert_structure_theorems", "check_ae",
    "check_sae", "convex_hull", "coverage", "diameter", "encroachment_graph",
    "enumerate_equilibria", "hull_measure", "psae_bruteforce", "psae_diameter_fast",
    "realize_dag", "run_dynamics",
]
