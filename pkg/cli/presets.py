"""
Built-in studies: the 14-variable Bezier airfoil and the 22-variable FFD hull.
"""
from config import settings
from geometry.builders import make_demo_hull
from parameterization.bezier import make_bezier_airfoil
from parameterization.ffd import make_ffd_hull

AIRFOIL = "airfoil-bezier14"
HULL = "hull-ffd22"


def _airfoil():
    return make_bezier_airfoil(nodes_per_side=91, measure_mode="arc")


def _hull():
    shape = make_demo_hull()
    return make_ffd_hull(shape), shape


PRESETS = {
    AIRFOIL: {
        "build": _airfoil,
        "samples": settings.SAMPLES,
        "confidence": settings.CONFIDENCE,
        "optimizer": {"budget": settings.BUDGETS[AIRFOIL], "polish": True,
                      "drop_levels": list(settings.DROP_LEVELS[AIRFOIL])},
    },
    HULL: {
        "build": _hull,
        "samples": settings.SAMPLES,
        "confidence": settings.CONFIDENCE,
        "optimizer": {"budget": settings.BUDGETS[HULL], "polish": True,
                      "drop_levels": list(settings.DROP_LEVELS[HULL])},
    },
}


def build_preset(name: str):
    """(spec, baseline) of a preset."""
    return PRESETS[name]["build"]()
