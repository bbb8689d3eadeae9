"""Exact toric geometry for lattice polytopes, fans, fan morphisms and
Laurent chart computations."""

from .fan import Cone, Fan, PLFunction, face_fan
from .laurent import LaurentPoly, MonomialMap, ParamPoly
from .morphism import LatticeMap
from .polytope import Polytope, dual, hull

__all__ = ["Cone", "Fan", "LatticeMap", "LaurentPoly", "MonomialMap", "PLFunction", "ParamPoly",
           "Polytope", "dual", "face_fan", "hull"]
__version__ = "0.1.0"
