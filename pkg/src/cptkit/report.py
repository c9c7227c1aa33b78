"""Verification report schema shared by all suites.

Serialized form::

    {"suite": str, "timestamp": str, "seed": int | null,
     "checks": [{"name", "pass", "residual", "tolerance", "notes"}],
     "data": {...}}          # optional, suite-specific payload

Non-finite floats are written as the tagged strings ``"inf"``/``"-inf"`` so
the document stays valid JSON. The timestamp comes from ``SOURCE_DATE_EPOCH``
when set and is the Unix epoch otherwise, which keeps reports from identical
runs byte-identical.
"""

import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

INF_TAG = "inf"


def report_timestamp():
    epoch = int(os.environ.get("SOURCE_DATE_EPOCH", "0"))
    return datetime.fromtimestamp(epoch, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def to_jsonable(value):
    """Recursively convert numpy scalars/arrays and non-finite floats."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return INF_TAG if v > 0 else "-" + INF_TAG
        return v
    if isinstance(value, (complex, np.complexfloating)):
        return [to_jsonable(value.real), to_jsonable(value.imag)]
    return value


@dataclass
class Check:
    name: str
    passed: bool
    residual: float = 0.0
    tolerance: float = 0.0
    notes: str = ""

    def to_dict(self):
        return {
            "name": self.name,
            "pass": bool(self.passed),
            "residual": to_jsonable(self.residual),
            "tolerance": to_jsonable(self.tolerance),
            "notes": self.notes,
        }


@dataclass
class Report:
    suite: str
    checks: list = field(default_factory=list)
    seed: int | None = None
    data: dict = field(default_factory=dict)
    timestamp: str = field(default_factory=report_timestamp)

    def add(self, name, passed, residual=0.0, tolerance=0.0, notes=""):
        check = Check(name, bool(passed), residual, tolerance, notes)
        self.checks.append(check)
        return check

    def extend(self, other, prefix=""):
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.passed, c.residual, c.tolerance, c.notes))

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def failures(self):
        return [c.name for c in self.checks if not c.passed]

    def check(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def max_residual(self):
        vals = [float(c.residual) for c in self.checks if c.residual is not None]
        return max(vals) if vals else 0.0

    def to_dict(self):
        doc = {
            "suite": self.suite,
            "timestamp": self.timestamp,
            "seed": self.seed,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }
        if self.data:
            doc["data"] = to_jsonable(self.data)
        return doc

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc):
        checks = [
            Check(c["name"], c["pass"], _untag(c["residual"]), _untag(c["tolerance"]), c.get("notes", ""))
            for c in doc["checks"]
        ]
        return cls(doc["suite"], checks, doc.get("seed"), doc.get("data", {}), doc["timestamp"])


def _untag(v):
    if v == INF_TAG:
        return math.inf
    if v == "-" + INF_TAG:
        return -math.inf
    return v
