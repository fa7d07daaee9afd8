# Maps original design vectors to displacement fields (Bezier airfoil, FFD lattice).
from parameterization.bernstein import bernstein, bernstein_matrix, de_casteljau
from parameterization.bezier import make_bezier_airfoil
from parameterization.core import Parameterization, apply, deform, register
from parameterization.ffd import make_ffd_hull
from parameterization.spec import (
    ActiveDof,
    DesignVector,
    ParameterizationSpec,
    load_spec,
    save_spec,
    spec_from_dict,
)
