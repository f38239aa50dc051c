"""Quasi-convergence, semiorthogonal decompositions and limit stability for paths of stability conditions."""
from .asymptotics import Germ, RealGerm, fit_germ
from .charge import ChargePath, FormalObject, SemistableFamily
from .kernels import BACKEND
from .models import PRESETS, build_curve, build_p1, build_preset, build_recovering
from .pipeline import analyze

__version__ = "0.1.0"

__all__ = ["BACKEND", "ChargePath", "FormalObject", "Germ", "PRESETS", "RealGerm", "SemistableFamily",
           "analyze", "build_curve", "build_p1", "build_preset", "build_recovering", "fit_germ"]
