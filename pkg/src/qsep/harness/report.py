"""Experiment reports: rows with raw numbers and re-derivable verdicts."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any

VERSION = "qsep-report/1"
RULES = ("eq1", "ge_bound", "le_bound", "lt_bound")
CSV_COLUMNS = ("instance", "exact_p", "sampled_p", "ci_radius", "bound", "verdict", "rule", "value_key", "tol")


@dataclass
class Row:
    """One checked quantity.

    The verdict compares ``row[value_key]`` against ``bound`` (or 1 for
    ``eq1``) using ``rule`` with slack ``tol``; see :func:`verdict_of`.
    """

    instance: str
    exact_p: float | None
    sampled_p: float | None
    ci_radius: float | None
    bound: float | None
    rule: str
    value_key: str = "exact_p"
    tol: float = 1e-9
    extra: dict[str, Any] = field(default_factory=dict)
    verdict: bool = field(init=False, default=False)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValueError(f"unknown rule {self.rule!r}")
        self.verdict = verdict_of(self.to_json(with_verdict=False))

    def to_json(self, with_verdict: bool = True) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("extra", "verdict")}
        out.update(self.extra)
        if with_verdict:
            out["verdict"] = self.verdict
        return out


def verdict_of(row: dict) -> bool:
    """Recompute a verdict from the raw numbers of a serialized row."""
    value = row.get(row["value_key"])
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return False
    rule, tol, bound = row["rule"], row["tol"], row["bound"]
    if rule == "eq1":
        return abs(value - 1.0) <= tol
    if rule == "ge_bound":
        return value >= bound - tol
    if rule == "le_bound":
        return value <= bound + tol
    return value < bound


def ci_radius(p_hat: float, shots: int, z: float = 3.0) -> float:
    """``z``-sigma binomial radius, floored at one count so p_hat in {0, 1} is not exact."""
    if shots <= 0:
        return math.inf
    return z * math.sqrt(max(p_hat * (1 - p_hat), 1.0 / shots) / shots)


@dataclass
class Report:
    experiment: str
    config: dict
    rows: list[Row] = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    seeds: list[int] = field(default_factory=list)
    runtime_ms: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.verdict for r in self.rows)

    def to_json(self) -> dict:
        summary = dict(self.summary)
        summary.setdefault("rows", len(self.rows))
        summary["passed"] = self.passed
        return {
            "version": VERSION,
            "experiment": self.experiment,
            "config": self.config,
            "rows": [r.to_json() for r in self.rows],
            "summary": summary,
            "seeds": list(self.seeds),
            "runtime_ms": self.runtime_ms,
        }

    def dumps(self) -> str:
        # json writes floats with repr, which round-trips exactly
        return json.dumps(self.to_json(), indent=2, sort_keys=True, allow_nan=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow(r.to_json())
        return buf.getvalue()

    def lines(self) -> list[str]:
        out = []
        for r in self.rows:
            tag = "PASS" if r.verdict else "FAIL"
            val = r.to_json()[r.value_key]
            out.append(f"{tag}  {r.instance}: {r.value_key}={_fmt(val)} rule={r.rule} bound={_fmt(r.bound)}")
        return out


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)
