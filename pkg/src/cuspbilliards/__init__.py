"""Dispersing billiards with cusps at flat points.

Simulator for tables whose boundary mixes dispersing arcs with power-law
cusp walls, plus the statistics harness for heavy-tailed return times,
corner-series asymptotics, alpha-stable Birkhoff-sum limits and the
M1-versus-J1 path-level dichotomy.
"""

__version__ = "0.1.0"

from .geometry import (  # noqa: F401
    ArcPiece,
    CuspSpec,
    GeometryError,
    SingularPointError,
    TableSpec,
    WallPiece,
    boundary_at,
    build_one_cusp_table,
    build_two_cusp_table,
    cusp_wall,
    validate_table,
)
from .dynamics import (  # noqa: F401
    Collision,
    SingularOrbitError,
    mu_of_boundary_region,
    next_collision,
    reflect,
    sample_mu,
)
