"""Sets in the plane: fractional perimeter, mean curvature, mass at infinity,
vertical rearrangement and the tangent-ball constructions."""

from .shapes import (Complement, Disk, Empty, HalfPlane, Intersection, Rectangle, Sector,
                     Shape, Subgraph, Union, UnsupportedFarFieldError, Whole, shape_from_dict)
from .pixels import (OverlapError, PixelGrid, PixelSet, boundary_edges, cell_pair_table,
                     fractional_perimeter, interaction)
from .curvature import (AlphaEstimate, CurvatureBoundParams, CurvatureEstimate,
                        TangentBallRecord, alpha_at_infinity, alpha_numeric,
                        curvature_bound_params, exterior_ball_is_clear, mean_curvature,
                        tangent_ball_check, truncated_curvature)
from .rearrangement import (ColumnFunction, ConfinementError, check_confined, default_geometry,
                            equivalence_offset, slab_region, subgraph_pixels,
                            vertical_rearrangement)
from .appendix import (DomeProfile, SmoothFunction, dome_profile, osculating_ball_radius,
                       osculating_identity_check, paraboloid_bound_check, verify_osculating_ball)

__all__ = [name for name in dir() if not name.startswith("_")]
