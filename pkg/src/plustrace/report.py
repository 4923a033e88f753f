import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple


class Estimate(NamedTuple):
    """A numerical value together with an absolute error bound."""

    value: float
    err: float


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return float(v)


@dataclass
class BoundReport:
    """One checked inequality  lhs (+ err) <= rhs.

    err is the numerical uncertainty of lhs; it is charged against the inequality,
    so ``passed`` means lhs + err <= rhs.
    """

    name: str
    params: dict
    lhs: float
    rhs: float
    err: float = 0.0
    notes: dict = field(default_factory=dict)

    @property
    def margin(self):
        return float(self.rhs) - float(self.lhs) - float(self.err)

    @property
    def passed(self):
        lhs, rhs, err = float(self.lhs), float(self.rhs), float(self.err)
        if math.isnan(lhs) or math.isnan(rhs) or math.isnan(err):
            return False
        return lhs + err <= rhs

    def to_dict(self):
        out = {
            "name": self.name,
            "params": {k: _plain(v) for k, v in self.params.items()},
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "err": float(self.err),
            "margin": self.margin,
            "pass": self.passed,
        }
        if self.notes:
            out["notes"] = {k: _plain(v) for k, v in self.notes.items()}
        return out


def summarize(reports):
    reports = list(reports)
    return {"total": len(reports), "failures": sum(not r.passed for r in reports)}
