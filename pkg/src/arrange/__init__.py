"""Exact spectral-sequence engine for arrangement complements.

Builds intersection posets of admissible arrangements of smooth
subvarieties, computes boundary stalks of the derived pushforward by
deletion/restriction, decomposes them into constant sheaves, assembles the
weighted second page, applies the single differential where an explicit
construction exists, and extracts weight-graded Betti numbers, with
independent combinatorial oracles for cross-checking.
"""

from .errors import ArrangeError, NotAdmissible, NotRankOne
from .linalg import (CompositionNonzero, RationalMatrix, ShapeMismatch,
                     homology_dim, kernel_dim, rank)
from .models import (ArrangementModel, MissingBetti, MonReport,
                     abstract_model, check_mon, configuration_model,
                     hyperplane_model, os_oracle)
from .polys import IntPoly
from .poset import (AdmissibilityReport, DuplicateMember, EmptyInput,
                    EmptyRestriction, Flat, IntersectionPoset, LastMember,
                    Member)
from .projective import (CohClass, DegreeMismatch, NegativeCodim, ProjProduct,
                         SpaceMap, SpaceMismatch, betti_poly, compose, cup,
                         identity_map, poincare_pair, power_inclusion,
                         pullback, pushforward)
from .spectral import (ExplicitModeUnavailable, FeasibilityResult, Infeasible,
                       MissingStratumData, NoGeometry, NotComposable,
                       RunResult, SpectralPage, WeightTable, WeightViolation,
                       WeightedCell, assemble_e2, build_differential_config,
                       build_differential_ncd, feasibility, run,
                       skew_row_homology)
from .stalks import (InconsistentDecomposition, PointwiseReport,
                     RecursionDepthExceeded, SheafDecomposition, StalkTable,
                     Summand, decompose, stalk_dims, stalk_tables,
                     verify_pointwise)

__version__ = "0.1.0"
