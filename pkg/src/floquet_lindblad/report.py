"""Named check results and their JSON and text renderings."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass(frozen=True)
class CheckResult:
    name: str
    module: str
    status: str
    measured: float | None
    tolerance: float | None
    property: str
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "module": self.module,
            "status": self.status,
            "measured": _jsonable(self.measured),
            "tolerance": _jsonable(self.tolerance),
            "property": self.property,
            "detail": self.detail,
        }


def _jsonable(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else str(x)


@dataclass
class CheckReport:
    checks: list[CheckResult] = field(default_factory=list)

    def add(
        self,
        name: str,
        module: str,
        measured: float | None,
        tolerance: float | None,
        property: str,
        passed: bool | None = None,
        detail: str = "",
    ) -> CheckResult:
        """Record a check; by default it passes when ``measured <= tolerance``."""
        if any(c.name == name for c in self.checks):
            raise ValueError(f"duplicate check {name!r}")
        if passed is None:
            passed = measured is not None and tolerance is not None and float(measured) <= tolerance
        status = PASS if passed else FAIL
        res = CheckResult(name, module, status, measured, tolerance, property, detail)
        self.checks.append(res)
        return res

    def skip(self, name: str, module: str, property: str, detail: str) -> CheckResult:
        res = CheckResult(name, module, SKIP, None, None, property, detail)
        self.checks.append(res)
        return res

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def get(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        return {
            "all_passed": self.all_passed,
            "n_checks": len(self.checks),
            "n_failed": len(self.failures()),
            "checks": [c.to_json() for c in self.checks],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"


HEADER = ("module", "check", "status", "measured", "tolerance")


def _num(x) -> str:
    if x is None:
        return "-"
    x = float(x)
    return f"{x + 0.0:.3e}" if x != 0 else "0.000e+00"


def report_render(report: CheckReport) -> str:
    """Fixed-layout text table, one row per check in insertion order."""
    rows = [HEADER] + [
        (c.module, c.name, c.status.upper(), _num(c.measured), _num(c.tolerance)) for c in report.checks
    ]
    widths = [max(len(r[i]) for r in rows) for i in range(len(HEADER))]
    lines = []
    for k, r in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
        if k == 0:
            lines.append("  ".join("-" * w for w in widths))
    if report.checks:
        n_fail = len(report.failures())
        lines.append("")
        lines.append(f"{len(report.checks)} checks, {n_fail} failed")
    return "\n".join(lines) + "\n"
