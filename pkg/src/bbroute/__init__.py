"""Place-and-route and noise analysis for bivariate bicycle codes on a toric cavity network."""

from .code import BBCode, BBCodeSpec, TABLE_CODES, build_code, build_schedule, registry_spec
from .layout import TorusLayout, fixed_coupler_layout, search_layout
from .noise import HardwareParams
from .routing import RoutedPass, route_pass_toric, route_schedule_toric

__all__ = [
    "BBCode",
    "BBCodeSpec",
    "HardwareParams",
    "RoutedPass",
    "TABLE_CODES",
    "TorusLayout",
    "build_code",
    "build_schedule",
    "fixed_coupler_layout",
    "registry_spec",
    "route_pass_toric",
    "route_schedule_toric",
    "search_layout",
]

__version__ = "0.1.0"
