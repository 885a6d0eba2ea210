"""Command-line interface: ``merodyn <subcommand> [flags]``.

Exit status is 0 on success, 2 on invalid flags and 1 on runtime errors.
Every output starts with a line holding the fully resolved configuration.
"""

from __future__ import annotations

import argparse
import io
import json
import logging
import math
import os
import re
import sys

import numpy as np

from . import csvio
from .errors import ConfigError, MerodynError, OrbitEscapedError
from .fixed_points import ROOT_TOL, find_cycles, solve_fixed_points
from .julia_render import (
    Mode,
    Palette,
    RenderConfig,
    Window,
    encode_ppm,
    render,
    write_outcomes_csv,
)
from .map_core import lambda_star
from .orbits import (
    LyapunovEstimate,
    bifurcation_sweep,
    classify_limit,
    cobweb,
    lyapunov,
    resolve_seed,
)

log = logging.getLogger("merodyn")

COMMANDS = ("fixed-points", "cycles", "classify", "lyapunov", "cobweb", "bifurcation", "julia")

# Built-in defaults; None means the flag is required.
DEFAULTS = {
    "fixed-points": {"lam": None, "tol": ROOT_TOL},
    "cycles": {"lam": None, "period": 2, "interval": (1e-9, 10.0), "grid": 100_000, "tol": ROOT_TOL},
    "classify": {"lam": None, "seed_rule": "critical", "seeds": None, "max_steps": 1_000_000},
    "lyapunov": {"lam": None, "lambda_range": None, "steps": 200, "k": 2000, "burn_in": 0,
                 "seed_rule": "critical"},
    "cobweb": {"lam": None, "n": 20, "seed_rule": "critical"},
    "bifurcation": {"lambda_range": None, "steps": 500, "transient": 20_000, "samples": 64,
                    "seed_rule": "critical"},
    "julia": {"lam": None, "window": (-1.0, 1.0, -1.0, 1.0), "width": 1000, "height": 1000,
              "n": 250, "escape_bound": 1e8, "conv_eps": 1e-6, "mode": "attractor-aware",
              "palette": "red-white"},
}

# Figure presets: (subcommand, panels).
FIGURES = {
    1: ("cycles", [{"lam": 12.0, "period": 2, "interval": (0.01, 6.0)}]),
    2: ("cobweb", [{"lam": 0.9, "n": 10, "seed_rule": "value:0.05"},
                   {"lam": 0.9, "n": 10, "seed_rule": "value:-0.3"}]),
    3: ("cobweb", [{"lam": 1.0, "n": 20, "seed_rule": "value:0.4"},
                   {"lam": 1.0, "n": 20, "seed_rule": "value:-0.2"}]),
    4: ("cobweb", [{"lam": 1.1, "n": 10, "seed_rule": "value:0.03"},
                   {"lam": 1.1, "n": 10, "seed_rule": "value:0.06"},
                   {"lam": 1.1, "n": 10, "seed_rule": "value:-0.25"}]),
    5: ("cobweb", [{"lam": "star", "n": 200, "seed_rule": "value:0.5"},
                   {"lam": 11.0, "n": 50, "seed_rule": "value:0.2"}]),
    6: ("cobweb", [{"lam": 11.0, "n": 50, "seed_rule": "value:1.6"}]),
    7: ("bifurcation", [{"lambda_range": (0.2, 15.0), "steps": 500}]),
    8: ("lyapunov", [{"lambda_range": (10.0, 45.0), "steps": 200, "k": 2000}]),
    9: ("julia", [{"lam": lam, "window": (-1.0, 1.0, -1.0, 1.0), "n": 250}
                  for lam in (0.9, 1.1, 9.93, 9.94)]),
}


# -- flag parsers --------------------------------------------------------------


def _float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {s!r}")
    return v


def lambda_value(s) -> float:
    if isinstance(s, (int, float)):
        v = float(s)
    elif s.strip().lower() in ("star", "lambda*", "lambda_star"):
        return lambda_star()
    else:
        v = _float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0 (valid range: (0, inf) or 'star'), got {s!r}")
    return v


def positive_float(s: str) -> float:
    v = _float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {s!r}")
    return v


def int_at_least(lo: int):
    def parse(s: str) -> int:
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {s!r}")
        return v
    return parse


def _floats(s: str, n: int) -> tuple[float, ...]:
    parts = s.split(",")
    if len(parts) != n:
        raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {s!r}")
    return tuple(_float(p) for p in parts)


def lambda_range(s: str) -> tuple[float, float]:
    lo, hi = _floats(s, 2)
    if not 0 < lo < hi:
        raise argparse.ArgumentTypeError(f"need 0 < min < max, got {s!r}")
    return lo, hi


def interval(s: str) -> tuple[float, float]:
    lo, hi = _floats(s, 2)
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"need lo < hi, got {s!r}")
    if lo <= -1.0 <= hi:
        raise argparse.ArgumentTypeError(f"interval must exclude the pole -1, got {s!r}")
    return lo, hi


def window(s: str) -> tuple[float, float, float, float]:
    w = _floats(s, 4)
    if not (w[0] < w[1] and w[2] < w[3]):
        raise argparse.ArgumentTypeError(
            f"need re_min < re_max and im_min < im_max (re_min,re_max,im_min,im_max), got {s!r}")
    return w


def seed_rule(s: str) -> str:
    if s == "critical":
        return s
    if s.startswith("value:"):
        v = _float(s[len("value:"):])
        if v == -1.0:
            raise argparse.ArgumentTypeError("seed must not be the pole -1")
        return s
    raise argparse.ArgumentTypeError(f"expected 'critical' or 'value:<x>', got {s!r}")


def seed_list(s: str) -> tuple[float, ...]:
    return tuple(_float(p) for p in s.split(","))


def _seed_of(rule: str) -> float:
    return resolve_seed(rule if rule == "critical" else rule[len("value:"):])


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="merodyn",
        description="Dynamics of zeta(z) = lambda * z * exp(-z) / (z + 1).")
    parser.add_argument("--workers", type=int_at_least(1), default=None,
                        help="worker threads (default: $MERODYN_WORKERS or CPU count)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats):
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=formats, default=None)
        p.add_argument("--figure", type=int, choices=sorted(FIGURES), default=None,
                       help="preset parameters for figure N (see README)")
        p.add_argument("--panel", type=int_at_least(1), default=1)

    def lam(p):
        p.add_argument("--lambda", dest="lam", type=lambda_value, default=None,
                       help="family parameter (> 0, or 'star')")

    def seeds(p):
        p.add_argument("--seed-rule", type=seed_rule, default=None,
                       help="'critical' (positive critical point) or 'value:<x>'")

    p = sub.add_parser("fixed-points", help="real fixed points and their stability")
    lam(p)
    p.add_argument("--tol", type=positive_float, default=None)
    common(p, ("csv", "text"))

    p = sub.add_parser("cycles", help="periodic cycles of a given period")
    lam(p)
    p.add_argument("--period", type=int_at_least(2), default=None)
    p.add_argument("--interval", type=interval, default=None)
    p.add_argument("--grid", type=int_at_least(100), default=None)
    p.add_argument("--tol", type=positive_float, default=None)
    common(p, ("csv", "text"))

    p = sub.add_parser("classify", help="long-run behaviour of real orbits")
    lam(p)
    seeds(p)
    p.add_argument("--seeds", type=seed_list, default=None,
                   help="comma-separated seeds (overrides --seed-rule)")
    p.add_argument("--max-steps", type=int_at_least(1), default=None)
    common(p, ("csv", "text"))

    p = sub.add_parser("lyapunov", help="finite-k Lyapunov exponents")
    lam(p)
    p.add_argument("--lambda-range", type=lambda_range, default=None)
    p.add_argument("--steps", type=int_at_least(2), default=None)
    p.add_argument("--k", type=int_at_least(100), default=None)
    p.add_argument("--burn-in", type=int_at_least(0), default=None)
    seeds(p)
    common(p, ("csv", "text"))

    p = sub.add_parser("cobweb", help="web diagram vertices")
    lam(p)
    p.add_argument("--n", type=int_at_least(1), default=None)
    seeds(p)
    common(p, ("csv", "text"))

    p = sub.add_parser("bifurcation", help="bifurcation diagram samples")
    p.add_argument("--lambda-range", type=lambda_range, default=None)
    p.add_argument("--steps", type=int_at_least(2), default=None)
    p.add_argument("--transient", type=int_at_least(0), default=None)
    p.add_argument("--samples", type=int_at_least(1), default=None)
    seeds(p)
    common(p, ("csv", "text"))

    p = sub.add_parser("julia", help="Fatou/Julia image")
    lam(p)
    p.add_argument("--window", type=window, default=None, help="re_min,re_max,im_min,im_max")
    p.add_argument("--width", type=int_at_least(1), default=None)
    p.add_argument("--height", type=int_at_least(1), default=None)
    p.add_argument("--n", type=int_at_least(1), default=None, help="maximum iterations")
    p.add_argument("--escape-bound", type=positive_float, default=None)
    p.add_argument("--conv-eps", type=positive_float, default=None)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=None)
    p.add_argument("--palette", choices=[q.value for q in Palette], default=None)
    common(p, ("ppm", "csv"))
    return parser


def resolve(parser: argparse.ArgumentParser, args: argparse.Namespace) -> dict:
    """Merge explicit flags over figure presets over built-in defaults."""
    cmd = args.command
    cfg = dict(DEFAULTS[cmd])
    if args.figure is not None:
        fig_cmd, panels = FIGURES[args.figure]
        if fig_cmd != cmd:
            parser.error(f"--figure {args.figure} is a '{fig_cmd}' preset, not '{cmd}'")
        if args.panel > len(panels):
            parser.error(f"--panel must be in 1..{len(panels)} for figure {args.figure}")
        for k, v in panels[args.panel - 1].items():
            cfg[k] = lambda_value(v) if k == "lam" else v
    for k in cfg:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = v
    if cmd == "lyapunov":
        if cfg["lam"] is None and cfg["lambda_range"] is None:
            parser.error("lyapunov needs --lambda or --lambda-range")
        if cfg["lam"] is not None and cfg["lambda_range"] is not None:
            parser.error("--lambda and --lambda-range are mutually exclusive")
    elif cmd == "bifurcation":
        if cfg["lambda_range"] is None:
            parser.error("bifurcation needs --lambda-range (valid: 0 < min < max)")
    elif cfg.get("lam", 0) is None:
        parser.error(f"{cmd} needs --lambda (valid range: (0, inf) or 'star')")
    if args.figure is not None:
        cfg["figure"] = args.figure
        cfg["panel"] = args.panel
    return cfg


def _workers(args) -> int:
    if args.workers is not None:
        return args.workers
    env = os.environ.get("MERODYN_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"MERODYN_WORKERS must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ConfigError(f"MERODYN_WORKERS must be a positive integer, got {env!r}")
        return n
    return os.cpu_count() or 1


# -- commands ----------------------------------------------------------------------


def compute(cmd: str, cfg: dict, workers: int = 1):
    """Run one subcommand and return its records."""
    if cmd == "fixed-points":
        return solve_fixed_points(cfg["lam"], cfg["tol"])
    if cmd == "cycles":
        return list(find_cycles(cfg["lam"], cfg["period"], cfg["interval"], cfg["grid"], cfg["tol"]))
    if cmd == "classify":
        seeds = cfg["seeds"] or (_seed_of(cfg["seed_rule"]),)
        return [(float(s), classify_limit(cfg["lam"], s, cfg["max_steps"])) for s in seeds]
    if cmd == "lyapunov":
        lams = ([cfg["lam"]] if cfg["lam"] is not None
                else np.linspace(*cfg["lambda_range"], cfg["steps"]).tolist())
        seed = _seed_of(cfg["seed_rule"])
        out = []
        for lam in lams:
            try:
                out.append(lyapunov(lam, seed, cfg["k"], cfg["burn_in"]))
            except OrbitEscapedError as exc:
                log.warning("%s", exc)
                out.append(LyapunovEstimate(lam, seed, 0, cfg["burn_in"], None, 0))
        return out
    if cmd == "cobweb":
        return [cobweb(cfg["lam"], _seed_of(cfg["seed_rule"]), cfg["n"])]
    if cmd == "bifurcation":
        lo, hi = cfg["lambda_range"]
        return bifurcation_sweep(lo, hi, cfg["steps"], cfg["transient"], cfg["samples"],
                                 _seed_of(cfg["seed_rule"]), workers=workers)
    if cmd == "julia":
        return render(render_config(cfg), workers=workers)
    raise ValueError(cmd)


def render_config(cfg: dict) -> RenderConfig:
    return RenderConfig(
        lam=cfg["lam"], window=Window(*cfg["window"]), width=cfg["width"],
        height=cfg["height"], max_iter=cfg["n"], escape_bound=cfg["escape_bound"],
        conv_eps=cfg["conv_eps"], mode=Mode(cfg["mode"]), palette=Palette(cfg["palette"]),
    ).validate()


def _jsonable(cfg: dict) -> dict:
    return {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.items()}


def _text(cmd: str, cfg: dict, records) -> str:
    lines = [csvio.header_line(dict(_jsonable(cfg), command=cmd)).rstrip("\n")]
    for r in records:
        lines.append(str(r))
    return "\n".join(lines) + "\n"


def _write(path: str, data) -> None:
    binary = isinstance(data, bytes)
    if path == "-":
        if binary:
            sys.stdout.buffer.write(data)
            sys.stdout.buffer.flush()
        else:
            sys.stdout.write(data)
        return
    with open(path, "wb" if binary else "w", **({} if binary else {"newline": ""})) as fh:
        fh.write(data)


_NUMERIC_LIST = re.compile(r"^-[\d.]")


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "-1,1,-1,1" as an option; glue such values to their flag
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if (tok.startswith("--") and "=" not in tok and i + 1 < len(argv)
                and _NUMERIC_LIST.match(argv[i + 1])):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def run(argv=None) -> int:
    parser = build_parser()
    argv = _join_negative_values(list(sys.argv[1:] if argv is None else argv))
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="merodyn: %(levelname)s: %(message)s")
    cmd = args.command
    cfg = resolve(parser, args)
    try:
        workers = _workers(args)
        if cmd == "julia":
            fmt = args.format or "ppm"
            rcfg = render_config(cfg)
            img = compute(cmd, cfg, workers)
            conf = json.dumps(dict(_jsonable(cfg), command=cmd), sort_keys=True)
            if fmt == "ppm":
                data = encode_ppm(img, rcfg.palette, comment="merodyn " + conf)
            else:
                buf = io.StringIO()
                buf.write(csvio.MAGIC + conf + "\n")
                write_outcomes_csv(img, buf)
                data = buf.getvalue()
        else:
            fmt = args.format or "csv"
            records = compute(cmd, cfg, workers)
            if fmt == "csv":
                buf = io.StringIO()
                csvio.write_records(buf, cmd, _jsonable(cfg), records)
                data = buf.getvalue()
            else:
                data = _text(cmd, cfg, records)
        _write(args.out, data)
    except (ConfigError, ValueError) as exc:
        print(f"merodyn: error: {exc}", file=sys.stderr)
        return 2
    except (MerodynError, ArithmeticError, OSError) as exc:
        print(f"merodyn: error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
