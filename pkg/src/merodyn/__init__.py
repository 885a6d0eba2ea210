"""Real and complex dynamics of zeta(z) = lambda * z * exp(-z) / (z + 1)."""

from .errors import (
    ConfigError,
    CriticalPointError,
    MerodynError,
    NotAFixedPointError,
    OrbitEscapedError,
    PoleEncounteredError,
    PoleError,
    SeedIsPoleError,
    ToleranceError,
)
from .fixed_points import (
    FixedPointRecord,
    PeriodicCycle,
    Stability,
    classify_fixed_point,
    cycle_multiplier,
    find_cycles,
    solve_fixed_points,
)
from .julia_render import (
    Mode,
    Palette,
    PixelState,
    RasterImage,
    RenderConfig,
    Window,
    classify_pixel,
    encode_ppm,
    render,
)
from .map_core import (
    Parameter,
    Regime,
    eval_derivative,
    eval_map,
    eval_schwarzian,
    lambda_star,
    regime,
    singular_data,
)
from .orbits import (
    Limit,
    LimitKind,
    bifurcation_sweep,
    classify_limit,
    cobweb,
    iterate,
    lyapunov,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CriticalPointError",
    "FixedPointRecord",
    "Limit",
    "LimitKind",
    "MerodynError",
    "Mode",
    "NotAFixedPointError",
    "OrbitEscapedError",
    "Palette",
    "Parameter",
    "PeriodicCycle",
    "PixelState",
    "PoleEncounteredError",
    "PoleError",
    "RasterImage",
    "Regime",
    "RenderConfig",
    "SeedIsPoleError",
    "Stability",
    "ToleranceError",
    "Window",
    "bifurcation_sweep",
    "classify_fixed_point",
    "classify_limit",
    "classify_pixel",
    "cobweb",
    "cycle_multiplier",
    "encode_ppm",
    "eval_derivative",
    "eval_map",
    "eval_schwarzian",
    "find_cycles",
    "iterate",
    "lambda_star",
    "lyapunov",
    "regime",
    "render",
    "singular_data",
    "solve_fixed_points",
]
