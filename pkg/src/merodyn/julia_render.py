"""Escape/convergence-time images of the Julia set of zeta_lambda.

Each pixel midpoint is iterated up to ``max_iter`` times.  An orbit whose
modulus exceeds ``escape_bound`` marks the pixel Fatou (red).  In
attractor-aware mode a pixel is also Fatou once its orbit enters a capture
region of the regime's attractor, and is Julia if nothing is decided
within ``max_iter`` steps.  Orbits reaching the pole are always Julia.

Capture regions are disks around attracting cycle points on which the
derivative of the return map is bounded by ``CAPTURE_CONTRACTION`` (so the
disk maps into itself), never smaller than ``conv_eps``.  For
1 < lambda < lambda* there is additionally a thin wedge at the repelling
origin around the positive real axis, all of which lies in the basin of
a_lambda; orbits that pass through the essential singularity land there.
"""

from __future__ import annotations

import csv
import enum
import functools
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError
from .map_core import Regime, regime
from .orbits import M_ESCAPE, attracting_cycles, fixed_attractor

__all__ = [
    "Mode", "Palette", "PixelState", "Window", "RenderConfig", "PixelOutcome",
    "RasterImage", "CaptureRegions", "capture_regions", "classify_pixel",
    "render", "encode_ppm", "write_outcomes_csv", "read_outcomes_csv",
    "UNIT_SQUARE",
]

CAPTURE_CONTRACTION = 0.95
CERTIFY_STEPS = 5000


class Mode(enum.Enum):
    ESCAPE_ONLY = "escape-only"
    ATTRACTOR_AWARE = "attractor-aware"


class Palette(enum.Enum):
    RED_WHITE = "red-white"
    ITERATION_SHADED = "shaded"


class PixelState(enum.IntEnum):
    UNDECIDED = _kernels.STATE_UNDECIDED
    FATOU = _kernels.STATE_FATOU
    JULIA = _kernels.STATE_JULIA


@dataclass(frozen=True)
class Window:
    re_min: float = -1.0
    re_max: float = 1.0
    im_min: float = -1.0
    im_max: float = 1.0

    def __iter__(self):
        return iter((self.re_min, self.re_max, self.im_min, self.im_max))


UNIT_SQUARE = Window(-1.0, 1.0, -1.0, 1.0)


@dataclass(frozen=True)
class RenderConfig:
    lam: float
    window: Window = UNIT_SQUARE
    width: int = 1000
    height: int = 1000
    max_iter: int = 250
    escape_bound: float = M_ESCAPE
    conv_eps: float = 1e-6
    mode: Mode = Mode.ATTRACTOR_AWARE
    palette: Palette = Palette.RED_WHITE

    def validate(self) -> "RenderConfig":
        w = self.window
        if not all(math.isfinite(v) for v in w):
            raise ConfigError(f"window must be finite, got {tuple(w)}")
        if not (w.re_min < w.re_max and w.im_min < w.im_max):
            raise ConfigError(f"degenerate window {tuple(w)}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ConfigError(f"lambda must be > 0, got {self.lam!r}")
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"image size must be positive, got {self.width}x{self.height}")
        if self.max_iter < 1:
            raise ConfigError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.escape_bound > 0:
            raise ConfigError(f"escape_bound must be > 0, got {self.escape_bound!r}")
        if not self.conv_eps > 0:
            raise ConfigError(f"conv_eps must be > 0, got {self.conv_eps!r}")
        return self

    @property
    def pixel_size(self) -> tuple[float, float]:
        w = self.window
        return (w.re_max - w.re_min) / self.width, (w.im_max - w.im_min) / self.height

    def pixel_center(self, row: int, col: int) -> complex:
        d_re, d_im = self.pixel_size
        w = self.window
        x = w.re_min + (col + 0.5) * d_re
        if row < self.height // 2:
            y = w.im_max - (row + 0.5) * d_im
        else:
            y = w.im_min + (self.height - 1 - row + 0.5) * d_im
        return complex(x, y)


@dataclass(frozen=True)
class PixelOutcome:
    state: PixelState
    iterations: int


@dataclass(eq=False)
class RasterImage:
    width: int
    height: int
    max_iter: int
    state: np.ndarray
    iterations: np.ndarray

    def outcome(self, row: int, col: int) -> PixelOutcome:
        return PixelOutcome(PixelState(int(self.state[row, col])),
                            int(self.iterations[row, col]))

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and self.max_iter == other.max_iter
                and np.array_equal(self.state, other.state)
                and np.array_equal(self.iterations, other.iterations))

    def fatou_mask(self) -> np.ndarray:
        return self.state == PixelState.FATOU


@dataclass(frozen=True)
class CaptureRegions:
    centers: np.ndarray = field(default_factory=_kernels.empty_centers)
    radii: np.ndarray = field(default_factory=_kernels.empty_centers)
    wedge_radius: float = 0.0
    wedge_angle: float = 0.0

    @property
    def wedge_slope(self) -> float:
        return math.tan(self.wedge_angle)


def _return_map_derivative(lam: float, z: np.ndarray, period: int) -> np.ndarray:
    d = np.ones_like(z)
    with np.errstate(all="ignore"):
        for _ in range(period):
            d = d * (-lam * (z * z + z - 1.0) * np.exp(-z) / (z + 1.0) ** 2)
            z = lam * z * np.exp(-z) / (z + 1.0)
    return np.abs(d)


def _certified_radius(lam: float, points, floor: float) -> float:
    """Largest radius r on a halving ladder such that |(zeta^n)'| <= q on
    every sampled point of each disk D(p, r); ``floor`` if none qualifies."""
    period = len(points)
    rho = np.linspace(0.0, 1.0, 17)[:, None]
    theta = np.linspace(0.0, 2.0 * np.pi, 72, endpoint=False)[None, :]
    unit = (rho * np.exp(1j * theta)).ravel()
    r = 0.25
    while r > floor:
        ok = True
        for p in points:
            d = _return_map_derivative(lam, p + r * unit, period)
            if not (np.all(np.isfinite(d)) and d.max() <= CAPTURE_CONTRACTION):
                ok = False
                break
        if ok:
            return r
        r *= 0.5
    return floor


def _certify_wedge(lam: float, centers: np.ndarray, radii: np.ndarray):
    """Find a wedge {0 < |z| < delta, |arg z| < theta} inside the basin.

    Near the repelling origin zeta(z) ~ lam * z, so points of the wedge
    move outward along (almost) their own ray and leave it through the
    annulus delta <= |z| <= lam * delta.  Sampling that annulus, widened by
    the accumulated angular drift, must show capture in every sample.
    """
    delta = min(1e-3, 1e-2 * (lam - 1.0))
    drift = 4.0 * delta * lam / (lam - 1.0)
    radii_s = np.linspace(delta, 1.05 * lam * delta, 9)
    for theta in (math.pi / 3, math.pi / 6, math.pi / 12, math.pi / 24, math.pi / 48):
        span = theta + drift
        if span >= math.pi / 2:
            continue
        ok = True
        for a in np.linspace(-span, span, 97):
            for rr in radii_s:
                s, _ = _kernels.classify_point(
                    lam, rr * math.cos(a), rr * math.sin(a), CERTIFY_STEPS, M_ESCAPE,
                    True, centers, radii, 0.0, 0.0, 0.0)
                if s != _kernels.STATE_FATOU:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            return delta, theta
    return 0.0, 0.0


@functools.lru_cache(maxsize=64)
def _capture_regions(lam: float, conv_eps: float) -> CaptureRegions:
    reg = regime(lam)
    a, parabolic = fixed_attractor(lam)
    if reg is Regime.ABOVE_STAR:
        cycles = [c.points for c in attracting_cycles(lam)]
    else:
        cycles = [(a,)]
    centers, radii = [], []
    for pts in cycles:
        r = conv_eps if parabolic else _certified_radius(lam, pts, conv_eps)
        centers.extend(pts)
        radii.extend([r] * len(pts))
    centers = np.asarray(centers, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    wedge = (0.0, 0.0)
    if reg is Regime.MIDDLE:
        wedge = _certify_wedge(lam, centers, radii)
    return CaptureRegions(centers, radii, *wedge)


def capture_regions(cfg: RenderConfig) -> CaptureRegions:
    if cfg.mode is Mode.ESCAPE_ONLY:
        return CaptureRegions()
    return _capture_regions(float(cfg.lam), float(cfg.conv_eps))


def _kernel_args(cfg: RenderConfig):
    cap = capture_regions(cfg)
    return (cfg.max_iter, float(cfg.escape_bound), cfg.mode is Mode.ATTRACTOR_AWARE,
            cap.centers, cap.radii, cap.wedge_radius, cap.wedge_slope, cap.wedge_angle)


def classify_pixel(cfg: RenderConfig, z0: complex) -> PixelOutcome:
    cfg.validate()
    z0 = complex(z0)
    if not (math.isfinite(z0.real) and math.isfinite(z0.imag)):
        raise ValueError(f"z0 must be finite, got {z0!r}")
    s, n = _kernels.classify_point(float(cfg.lam), z0.real, z0.imag, *_kernel_args(cfg))
    return PixelOutcome(PixelState(s), n)


def default_workers() -> int:
    return os.cpu_count() or 1


def render(cfg: RenderConfig, workers: int | None = None) -> RasterImage:
    """Classify every pixel midpoint of ``cfg.window``.

    Rows are the unit of parallel work; the result is identical for any
    number of workers.
    """
    cfg.validate()
    h, w = cfg.height, cfg.width
    state = np.zeros((h, w), dtype=np.uint8)
    iters = np.zeros((h, w), dtype=np.int32)
    d_re, d_im = cfg.pixel_size
    win = cfg.window
    args = _kernel_args(cfg)
    workers = max(1, workers or default_workers())
    block = max(1, min(16, -(-h // workers)))
    spans = [(lo, min(lo + block, h)) for lo in range(0, h, block)]

    def run(span):
        _kernels.render_rows(float(cfg.lam), win.re_min, d_re, win.im_max, win.im_min, d_im,
                             h, span[0], span[1], *args, state, iters)

    if workers == 1:
        for s in spans:
            run(s)
    else:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(run, spans))
    return RasterImage(w, h, cfg.max_iter, state, iters)


def _rgb(img: RasterImage, palette: Palette) -> np.ndarray:
    rgb = np.full((img.height, img.width, 3), 255, dtype=np.uint8)
    fatou = img.state == PixelState.FATOU
    rgb[fatou, 1] = 0
    rgb[fatou, 2] = 0
    if palette is Palette.ITERATION_SHADED:
        # bright red for fast decisions down to dark red at max_iter
        steps = np.clip(img.iterations[fatou].astype(np.int64), 0, img.max_iter)
        rgb[fatou, 0] = (255 - (191 * steps) // max(1, img.max_iter)).astype(np.uint8)
    return rgb


def encode_ppm(img: RasterImage, palette: Palette = Palette.RED_WHITE,
               comment: str | None = None) -> bytes:
    """Binary PPM (P6, maxval 255).  Fatou is red, Julia and undecided white."""
    head = "P6\n"
    if comment:
        head += "".join(f"# {line}\n" for line in comment.splitlines())
    head += f"{img.width} {img.height}\n255\n"
    return head.encode("ascii") + _rgb(img, Palette(palette)).tobytes()


_CSV_FIELDS = ("row", "col", "state", "iterations")


def write_outcomes_csv(img: RasterImage, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(_CSV_FIELDS)
    names = {s.value: s.name.lower() for s in PixelState}
    for r in range(img.height):
        for c in range(img.width):
            w.writerow((r, c, names[int(img.state[r, c])], int(img.iterations[r, c])))


def read_outcomes_csv(stream, max_iter: int) -> RasterImage:
    rows = [line for line in stream if not line.startswith("#")]
    reader = csv.DictReader(io.StringIO("".join(rows)))
    recs = [(int(r["row"]), int(r["col"]), PixelState[r["state"].upper()], int(r["iterations"]))
            for r in reader]
    h = max(r[0] for r in recs) + 1
    w = max(r[1] for r in recs) + 1
    state = np.zeros((h, w), dtype=np.uint8)
    iters = np.zeros((h, w), dtype=np.int32)
    for r, c, s, n in recs:
        state[r, c] = s
        iters[r, c] = n
    return RasterImage(w, h, max_iter, state, iters)
