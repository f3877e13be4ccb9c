"""Exact desk-scale experiments on shifted product sets and multiplicative energy."""

from .energy import (
    DyadicBucket,
    RepHistogram,
    dyadic_buckets,
    energy_bruteforce,
    energy_moment,
    rep_function,
    richest_bucket,
)
from .errors import IdentityViolation, SumProdError
from .field import FieldCtx, char_guard, is_prime
from .incidence import (
    LineFamily,
    PointGrid,
    construction_identity_check,
    count_incidences,
    sdz_bound,
    shift_lines,
    swapped_construction_check,
    swapped_lines,
)
from .popularity import intersection_bound_check, popular_decompose, refine_43
from .search import exhaustive, generate_family, hill_climb
from .setops import FSet, combine, dilate, parse_set, shift, shifted_product
from .verify import (
    equiv_classes,
    equiv_energy_inequality,
    proof_trace_shift,
    trivial_solution_count,
    verify_corollary,
    verify_e2,
    verify_e4,
    verify_shift,
)

__version__ = "0.1.0"
