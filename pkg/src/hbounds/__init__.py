"""Energy bounds for tangent unit-vector fields on convex polyhedra."""

from .geometry import (Polyhedron, Prism, build_polyhedron, load_polyhedron,
                       polyhedron_from_dict, rectangular_prism)
from .sectors import SectorPartition, enumerate_sectors
from .topology import OctantTopology, TangentTopology, check_admissible
from .connection import lower_bound_energy, minimal_connection
from .octant import build_conformal_map, map_invariants, mn_example_field, surgered_map
from .quadrature import QuadratureSpec, octant_energy_report, wrapping_numbers_numeric
from .extension import extend_and_bound

__version__ = "0.1.0"
