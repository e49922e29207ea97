"""Point counts and line-freeness of hypersurfaces over small finite fields."""
from .gf import GF, FieldElement, FieldSpec, enumerate_elements, frobenius
from .bounds import induction_step_check, main_bound, subset_section_bound, sziklai_bound, theta
from .projgeom import (
    Hyperplane,
    ProjLine,
    ProjPoint,
    ProjectiveMap,
    enumerate_hyperplanes,
    enumerate_lines,
    enumerate_pgl,
    enumerate_points,
    space,
)
from .form import HomogeneousForm, parse
from .analysis import (
    BoundVerdict,
    Status,
    check_bound,
    count_points,
    curve_K,
    elliptic_quadric,
    is_equivalent_to_K,
    lines_on,
    profile,
    singular_points_fq,
)

__version__ = "0.1.0"
