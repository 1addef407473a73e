from .base_module import BaseModule
from .quiver_dt import QuiverDT, DTRecord, dt_invariants
from .hdtv import HDTV, curve_class, gw_combination
from .presets import Preset, get_preset, preset_names
from .correspondence import pullback, verify_comparison, verify_main, local_p2_sheaf_dt

__all__ = [
    "BaseModule",
    "QuiverDT",
    "DTRecord",
    "dt_invariants",
    "HDTV",
    "curve_class",
    "gw_combination",
    "Preset",
    "get_preset",
    "preset_names",
    "pullback",
    "verify_comparison",
    "verify_main",
    "local_p2_sheaf_dt",
]
