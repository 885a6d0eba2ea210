"""Self-describing CSV files for every record type.

The first line is ``# merodyn <json>`` holding the resolved run
configuration; the second is the column header.  Floats are written with 17
significant digits so that reading a file back gives identical values.
"""

from __future__ import annotations

import csv
import io
import json

from .fixed_points import FixedPointRecord, PeriodicCycle, Stability
from .orbits import (
    BifurcationRecord,
    CobwebPath,
    Limit,
    LimitKind,
    LyapunovEstimate,
    Termination,
)

MAGIC = "# merodyn "


def fmt(x: float | None) -> str:
    return "" if x is None else format(float(x), ".17g")


def _opt_float(s: str) -> float | None:
    return None if s == "" else float(s)


def _opt_int(s: str) -> int | None:
    return None if s == "" else int(s)


def _points(s: str) -> tuple[float, ...]:
    return tuple(float(v) for v in s.split())


def _fmt_points(pts) -> str:
    return " ".join(fmt(v) for v in pts)


def _fixed_rows(records):
    yield ("location", "stability", "multiplier", "is_origin")
    for r in records:
        yield (fmt(r.location), r.stability.value, fmt(r.multiplier), int(r.is_origin))


def _fixed_parse(rows):
    return [FixedPointRecord(float(r["location"]), float(r["multiplier"]),
                             Stability(r["stability"]), bool(int(r["is_origin"])))
            for r in rows]


def _cycle_rows(records):
    yield ("period", "points", "multiplier", "stability")
    for c in records:
        yield (c.period, _fmt_points(c.points), fmt(c.multiplier), c.stability.value)


def _cycle_parse(rows):
    return [PeriodicCycle(int(r["period"]), _points(r["points"]), float(r["multiplier"]),
                          Stability(r["stability"])) for r in rows]


def _classify_rows(records):
    yield ("seed", "kind", "step", "cycle_period", "cycle_points",
           "cycle_multiplier", "cycle_stability")
    for seed, lim in records:
        c = lim.cycle
        yield (fmt(seed), lim.kind.value, "" if lim.step is None else lim.step,
               "" if c is None else c.period, "" if c is None else _fmt_points(c.points),
               "" if c is None else fmt(c.multiplier), "" if c is None else c.stability.value)


def _classify_parse(rows):
    out = []
    for r in rows:
        cyc = None
        if r["cycle_period"]:
            cyc = PeriodicCycle(int(r["cycle_period"]), _points(r["cycle_points"]),
                                float(r["cycle_multiplier"]), Stability(r["cycle_stability"]))
        out.append((float(r["seed"]), Limit(LimitKind(r["kind"]), _opt_int(r["step"]), cyc)))
    return out


def _lyap_rows(records):
    yield ("lambda", "seed", "terms_used", "burn_in", "value", "skipped_terms")
    for e in records:
        yield (fmt(e.lam), fmt(e.seed), e.terms_used, e.burn_in, fmt(e.value), e.skipped_terms)


def _lyap_parse(rows):
    return [LyapunovEstimate(float(r["lambda"]), float(r["seed"]), int(r["terms_used"]),
                             int(r["burn_in"]), _opt_float(r["value"]), int(r["skipped_terms"]))
            for r in rows]


def _cobweb_rows(paths):
    yield ("path", "vertex", "x", "y", "termination")
    for k, p in enumerate(paths):
        for i, (x, y) in enumerate(p.vertices):
            yield (k, i, fmt(x), fmt(y), p.termination.value)


def _cobweb_parse(rows):
    paths: dict[int, CobwebPath] = {}
    for r in rows:
        k = int(r["path"])
        p = paths.setdefault(k, CobwebPath([], Termination(r["termination"])))
        p.vertices.append((float(r["x"]), float(r["y"])))
    return [paths[k] for k in sorted(paths)]


def _bif_rows(records):
    yield ("lambda", "sample", "x")
    for rec in records:
        if not rec.attractor_samples:
            yield (fmt(rec.lam), "", "")
        for i, x in enumerate(rec.attractor_samples):
            yield (fmt(rec.lam), i, fmt(x))


def _bif_parse(rows):
    out: list[BifurcationRecord] = []
    cur_lam, cur = None, []
    for r in rows:
        lam = float(r["lambda"])
        if cur_lam is not None and lam != cur_lam:
            out.append(BifurcationRecord(cur_lam, tuple(cur)))
            cur = []
        cur_lam = lam
        if r["sample"] != "":
            cur.append(float(r["x"]))
    if cur_lam is not None:
        out.append(BifurcationRecord(cur_lam, tuple(cur)))
    return out


CODECS = {
    "fixed-points": (_fixed_rows, _fixed_parse),
    "cycles": (_cycle_rows, _cycle_parse),
    "classify": (_classify_rows, _classify_parse),
    "lyapunov": (_lyap_rows, _lyap_parse),
    "cobweb": (_cobweb_rows, _cobweb_parse),
    "bifurcation": (_bif_rows, _bif_parse),
}


def header_line(config: dict) -> str:
    return MAGIC + json.dumps(config, sort_keys=True) + "\n"


def write_records(stream, command: str, config: dict, records) -> None:
    rows, _ = CODECS[command]
    stream.write(header_line(dict(config, command=command)))
    w = csv.writer(stream, lineterminator="\n")
    for row in rows(records):
        w.writerow(row)


def read_records(stream) -> tuple[dict, list]:
    """Inverse of :func:`write_records`; returns ``(config, records)``."""
    text = stream.read() if hasattr(stream, "read") else str(stream)
    first, _, body = text.partition("\n")
    if not first.startswith(MAGIC):
        raise ValueError("not a merodyn CSV file (missing header line)")
    config = json.loads(first[len(MAGIC):])
    _, parse = CODECS[config["command"]]
    return config, parse(list(csv.DictReader(io.StringIO(body))))
