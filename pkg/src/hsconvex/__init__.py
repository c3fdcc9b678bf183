"""Numerical kit for Hardy-Sobolev analysis on strongly convex domains in C^n.

Core pieces: the reproducing kernel integral on level surfaces, the boundary
quasimetric and its homogeneous-type structure, polynomial approximants of
the kernel with measured certificates, approach-region samplers and area
integrals, pseudoanalytic continuations with the reconstruction identity, and
the dyadic polynomial-approximation smoothness diagnostic, all at desk scale
on a catalog of concrete domains (n = 2).
"""

from .domain import (
    DomainSpec,
    BoundaryPointData,
    ball,
    ellipsoid,
    perturbed_ball,
    from_catalog,
    domain_eval,
    project_boundary,
    symmetric_point,
    normalize_at,
)
from .homtype import (
    BoundaryGrid,
    build_boundary_grid,
    qdist,
    quasiball,
    check_homogeneous,
    qm_exterior_check,
    maximal_function,
)
from .forms import (
    HoloFunction,
    ShellGrid,
    build_shell_grid,
    clf_kernel,
    clf_reproduce,
    leray_density,
    pair_dbar_with_leray,
    hardy_norm,
    sobolev_norm,
)
from .dzyadyk import Lune, lune_of, build_T, build_Kglob, validate_Kglob
from .koranyi import (
    RegionSample,
    sample_region,
    region_integrate,
    area_internal,
    area_Il,
    check_area_inequality,
)
from .continuation import (
    Continuation,
    Cutoff,
    extend_by_symmetry,
    extend_by_global,
    verify_pac,
    sobolev_functional,
)
from .pipeline import (
    PolynomialCn,
    SmoothnessReport,
    project_direct,
    project_via_continuation,
    smoothness_sum,
    diagnose,
    ab_fields,
    check_bk_lemma,
)
from .corpus import build_corpus, CorpusEntry

__version__ = "0.1.0"

__all__ = [
    "DomainSpec", "BoundaryPointData", "ball", "ellipsoid", "perturbed_ball",
    "from_catalog", "domain_eval", "project_boundary", "symmetric_point",
    "normalize_at", "BoundaryGrid", "build_boundary_grid", "qdist",
    "quasiball", "check_homogeneous", "qm_exterior_check",
    "maximal_function", "HoloFunction", "ShellGrid", "build_shell_grid",
    "clf_kernel", "clf_reproduce", "leray_density", "pair_dbar_with_leray",
    "hardy_norm", "sobolev_norm", "Lune", "lune_of", "build_T", "build_Kglob",
    "validate_Kglob", "RegionSample", "sample_region", "region_integrate",
    "area_internal", "area_Il", "check_area_inequality", "Continuation",
    "Cutoff", "extend_by_symmetry", "extend_by_global", "verify_pac",
    "sobolev_functional", "PolynomialCn", "SmoothnessReport",
    "project_direct", "project_via_continuation", "smoothness_sum",
    "diagnose", "ab_fields", "check_bk_lemma", "build_corpus", "CorpusEntry",
]
