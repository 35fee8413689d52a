"""Test reports and their JSON / text serialization."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any

__all__ = ["Interval", "DetectionSet", "TestReport", "emit_report", "parse_report", "dumps"]


@dataclass(frozen=True)
class Interval:
    """A detected window; ``j`` and ``k`` are 1-based inclusive indices."""

    j: int
    k: int
    x_j: float
    x_k: float
    t: float
    penalty: float
    excess: float
    direction: str


@dataclass(frozen=True)
class DetectionSet:
    intervals: tuple[Interval, ...] = ()
    minimal: tuple[Interval, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.intervals)


@dataclass(eq=True)
class TestReport:
    method: str
    version: str
    n: int
    alpha: float
    replicates: int
    seed: int
    kernel: str
    policy: str
    min_window: int
    one_sided: bool
    table_mode: str
    t_n: float
    kappa: float
    p_value: float
    reject: bool
    sigma: float | None
    intervals: list[Interval]
    minimal_intervals: list[Interval]
    timing: dict[str, float] | None = None
    # in-memory only, not serialized
    scan: Any = field(default=None, compare=False, repr=False)
    calibration: Any = field(default=None, compare=False, repr=False)

    __test__ = False  # keep pytest from collecting this class

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name in ("scan", "calibration"):
                continue
            v = getattr(self, f.name)
            if f.name in ("intervals", "minimal_intervals"):
                v = [asdict(iv) for iv in v]
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TestReport":
        kw = dict(data)
        for key in ("intervals", "minimal_intervals"):
            kw[key] = [Interval(**iv) for iv in kw[key]]
        for key in ("alpha", "t_n", "kappa", "p_value"):
            kw[key] = float(kw[key])
        if kw.get("sigma") is not None:
            kw["sigma"] = float(kw["sigma"])
        return cls(**kw)


def _float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"cannot serialize non-finite number {v!r}")
    s = format(v, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def _encode(obj, indent: int, level: int) -> str:
    if obj is None or isinstance(obj, (bool, str)):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(int(obj))
    if isinstance(obj, float):
        return _float(obj)
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "item"):  # numpy scalar
        return _encode(obj.item(), indent, level)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""
    return _encode(obj, indent, 0) + "\n"


def _table(r: TestReport) -> str:
    lines = [
        f"method        {r.method}",
        f"n             {r.n}",
        f"kernel        {r.kernel}",
        f"policy        {r.policy} (min window {r.min_window}, {r.table_mode})",
        f"alpha         {r.alpha:g}",
        f"replicates    {r.replicates}   seed {r.seed}",
    ]
    if r.sigma is not None:
        lines.append(f"sigma         {r.sigma:.6g}")
    lines += [
        f"T_n           {r.t_n:.4f}",
        f"kappa         {r.kappa:.4f}",
        f"p-value       {r.p_value:.4f}",
        f"reject        {'yes' if r.reject else 'no'}",
        f"detected      {len(r.intervals)} intervals, {len(r.minimal_intervals)} minimal",
    ]
    if r.minimal_intervals:
        lines.append("")
        lines.append(f"{'j':>5} {'k':>5} {'x_j':>10} {'x_k':>10} {'T_jk':>9} {'excess':>8} dir")
        for iv in r.minimal_intervals:
            lines.append(
                f"{iv.j:5d} {iv.k:5d} {iv.x_j:10.4g} {iv.x_k:10.4g} {iv.t:9.4f} {iv.excess:8.4f}  {iv.direction}"
            )
    return "\n".join(lines) + "\n"


def emit_report(r: TestReport, format: str = "json") -> bytes:
    if format == "json":
        return dumps(r.to_dict()).encode()
    if format == "table":
        return _table(r).encode()
    raise ValueError(f"unknown report format {format!r}")


def parse_report(data: bytes | str) -> TestReport:
    return TestReport.from_dict(json.loads(data))
