"""Combinatorial vector calculus on surfaces, with numerical checks against
the smooth theory."""

from .calculus import (boundary_integral, check_whirl_theorem, ebb, ebb_balance, tilt,
                       tilt_bar, tiltawhirl_residual, whirl)
from .cohomology import cochain_complex, cohomology_dims, exact_rank, homology_dims
from .fields import (CVF, FSF, VSF, FieldError, canonicalize, cvf_same, integrate_faces,
                     integrate_path, integrate_vertices, load_field)
from .mesh import (CombSurface, DirectedEdge, EdgeSplit, FaceSplit, MeshError, MeshParseError,
                   NonOrientableWitness, Orientation, boundary, euler_characteristic, load_mesh,
                   dump_mesh, orient, subdivide, validate)
from .paths import (EdgePath, FailureWitness, PathError, decompose_loop, is_conservative,
                    is_embedded, potential)
from .pullback import Diffeo, Mat2, congruence_residual, mat_scurl, pullback_field, verify_cov
from .quadrature import Quadrature
from .refine import (FIELDS, REGIONS, SmoothField, VHRegion, discretize, green_residual,
                     grid_mesh, mvt_interval_check, whirl_curl_convergence)

__version__ = "0.1.0"
