"""Pass/warn/fail reporting for configuration and assumption checks."""

from __future__ import annotations

from dataclasses import dataclass, field

OK = "ok"
WARN = "warn"
FAIL = "fail"


@dataclass(frozen=True)
class Check:
    """A single named inequality or condition with its outcome."""

    name: str
    passed: bool
    detail: str = ""
    advisory: bool = False  # informational only; never affects overall status


@dataclass(frozen=True)
class ValidationResult:
    status: str  # "ok" | "warn" | "fail"
    checks: tuple[Check, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed and not c.advisory]

    def describe(self) -> str:
        lines = [f"status: {self.status}"]
        for c in self.checks:
            mark = "pass" if c.passed else ("info" if c.advisory else "FAIL")
            suffix = f" ({c.detail})" if c.detail else ""
            lines.append(f"  [{mark}] {c.name}{suffix}")
        return "\n".join(lines)
