# Discretized shapes, weighted inner product and geometric evaluators.
from geometry.shape import (
    DiscreteShape,
    DisplacementField,
    bounding_extents,
    element_measures,
    enclosed_volume,
    field_norm,
    hull_particulars,
    roughness,
    section_area,
    submerged_part,
    waterline_weights,
    weighted_inner_product,
)
