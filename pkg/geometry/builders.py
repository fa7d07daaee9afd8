"""
Procedural shapes: boxes and spheres for checking the volume integrator, and the
Wigley-type demi-hull used by the hull preset.
"""
import logging

import numpy as np

from geometry.shape import DiscreteShape, element_measures, waterline_weights

logger = logging.getLogger(__name__)


def _loop_xz(lower, upper):
    x0, _, z0 = lower
    x1, _, z1 = upper
    return np.array([[x0, z0], [x1, z0], [x1, z1], [x0, z1], [x0, z0]], dtype=float)


def make_box(lower=(0.0, 0.0, 0.0), upper=(1.0, 1.0, 1.0), mirrored=False,
             measure_mode="panel"):
    """
    Axis-aligned box as a structured grid.

    Rows sweep along xi2 through the xi1-xi3 perimeter loop; fan rows cap the
    ends. With ``mirrored`` the face at the lower xi2 level is left open, which
    makes the grid a demi-surface closed by that plane.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    loop = _loop_xz(lower, upper)
    center = 0.5 * (lower + upper)

    def ring(y):
        return np.column_stack([loop[:, 0], np.full(len(loop), y), loop[:, 1]])

    def fan(y):
        return np.tile([center[0], y, center[2]], (len(loop), 1))

    rings = [ring(lower[1]), ring(upper[1]), fan(upper[1])]
    if not mirrored:
        rings.insert(0, fan(lower[1]))
    nodes = np.vstack(rings)
    topology = (len(rings), len(loop))
    measures = element_measures(nodes, topology, measure_mode)
    return DiscreteShape(nodes, measures, np.ones(len(nodes)), topology, mirrored=mirrored)


def make_unit_cube(measure_mode="panel"):
    return make_box((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), measure_mode=measure_mode)


def make_sphere(radius=1.0, n_lon=90, n_lat=25, center=(0.0, 0.0, 0.0), measure_mode="panel"):
    """Latitude-longitude sphere; rows run pole to pole, columns close on themselves."""
    lat = np.linspace(-0.5 * np.pi, 0.5 * np.pi, n_lat)
    lon = np.linspace(0.0, 2.0 * np.pi, n_lon)
    la, lo = np.meshgrid(lat, lon, indexing="ij")
    nodes = np.column_stack([
        (radius * np.cos(la) * np.cos(lo)).ravel(),
        (radius * np.cos(la) * np.sin(lo)).ravel(),
        (radius * np.sin(la)).ravel(),
    ]) + np.asarray(center, dtype=float)
    topology = (n_lat, n_lon)
    return DiscreteShape(nodes, element_measures(nodes, topology, measure_mode),
                         np.ones(len(nodes)), topology)


def make_demo_hull(length=5.72, beam=0.76, draught=0.25, stations=90, girth=25,
                   freeboard_ratio=0.2, measure_mode="panel"):
    """
    Wigley-type demi-hull standing in for a naval combatant.

    Stations run along xi1 from 0 to ``length`` and always include midship;
    girth points run from the keel (xi3 = -draught) to the deck
    (xi3 = freeboard_ratio * draught). Nodes above the waterline xi3 = 0 get a
    null weight.
    """
    half = stations // 2
    x = np.concatenate([
        np.linspace(0.0, 0.5 * length, half),
        np.linspace(0.5 * length, length, stations - half + 1)[1:],
    ])
    freeboard = freeboard_ratio * draught
    n_wet = int(round((girth - 1) * draught / (draught + freeboard)))
    z = np.concatenate([
        np.linspace(-draught, 0.0, n_wet + 1),
        np.linspace(0.0, freeboard, girth - n_wet)[1:],
    ])
    xx, zz = np.meshgrid(x, z, indexing="ij")
    xi = (xx - 0.5 * length) / length
    lengthwise = 1.0 - (2.0 * xi) ** 2
    vertical = np.where(zz < 0.0, 1.0 - (zz / draught) ** 2, 1.0)
    yy = 0.5 * beam * lengthwise * vertical
    nodes = np.column_stack([xx.ravel(), yy.ravel(), zz.ravel()])
    topology = (stations, girth)
    logger.debug(f"Demo hull: {stations}x{girth} nodes, {n_wet + 1} girth points wetted")
    return DiscreteShape(
        nodes,
        element_measures(nodes, topology, measure_mode),
        waterline_weights(nodes, 0.0),
        topology,
        mirrored=True,
        waterline=0.0,
    )
