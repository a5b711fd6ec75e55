"""maplab: a laboratory for rooted planar maps.

Rotation-system maps, well-labeled trees, the trivial / CVS / AB bijections,
exhaustive small-size certification and seeded Monte Carlo experiments.
"""

__version__ = "0.1.0"

from .core_map import (
    PlaneMap,
    PointedPlaneMap,
    bfs_distances,
    build_map,
    canonical_form,
    dual,
    faces,
    max_face_degree,
    maps_isomorphic,
    read_map_text,
    write_map_text,
)
from .trees import (
    ContourLabelProcess,
    WellLabeledTree,
    broad_local_maxima,
    contour_label_process,
    enumerate_trees,
    nj_process,
    read_tree_text,
    sample_uniform_tree,
    write_tree_text,
)
from .bijections import (
    AbImage,
    CvsImage,
    GeodesicChain,
    INFINITY,
    ab_forward,
    cvs_forward,
    cvs_inverse,
    d_circ_formula,
    d_circ_q,
    is_special,
    leftmost_geodesic,
    successor,
    trivial_map_to_quad,
    trivial_quad_to_map,
)

__all__ = [name for name in dir() if not name.startswith("_")]
