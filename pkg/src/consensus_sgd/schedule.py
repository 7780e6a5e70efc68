"""Diminishing two-time-scale step sizes.

The gradient weight alpha_k = a / (eps*k + 1)**delta2 decays faster than
the consensus weight beta_k = b / (eps*k + 1)**delta1, so neighbor mixing
dominates asymptotically. Their ratio gamma_k = alpha_k / beta_k feeds the
Lyapunov diagnostics. The iteration-scale factor eps defaults to 1, in
which case the sequences are the canonical a/(k+1)**delta form.
"""

from __future__ import annotations

from dataclasses import dataclass

from .validation import FAIL, OK, WARN, Check, ValidationResult

# Absolute tolerance for detecting the boundary case 3*delta1 == delta2
# (1/3 is not exactly representable, so exact comparison is meaningless).
BOUNDARY_ATOL = 1e-9


@dataclass(frozen=True)
class StepSchedule:
    a: float = 1.0
    b: float = 0.2
    delta1: float = 0.28
    delta2: float = 0.9
    epsilon: float = 1.0

    def alpha(self, k):
        """Gradient step size at iteration k (scalar or array)."""
        return self.a / (self.epsilon * k + 1.0) ** self.delta2

    def beta(self, k):
        """Consensus step size at iteration k (scalar or array)."""
        return self.b / (self.epsilon * k + 1.0) ** self.delta1

    def gamma(self, k):
        """Ratio alpha_k / beta_k."""
        return self.alpha(k) / self.beta(k)

    @property
    def strictly_valid(self) -> bool:
        return validate_schedule(self, mode="strict").status == OK


def validate_schedule(s: StepSchedule, mode: str = "strict") -> ValidationResult:
    """Check the exponent conditions for mean-square convergence.

    Required: 0 < 3*delta1 < delta2 <= 1, delta1 + delta2 > 1 and
    delta2 > 1/2, with positive numerators a and b. In compat mode the
    boundary case 3*delta1 == delta2 downgrades to a warning, since it is
    the configuration commonly used in practice. The tighter margin
    delta2 > 2*delta1 is reported informationally but never enforced.
    """
    if mode not in ("strict", "compat"):
        raise ValueError(f"mode must be 'strict' or 'compat', got {mode!r}")

    checks: list[Check] = []
    for name, value in (("a", s.a), ("b", s.b),
                        ("delta1", s.delta1), ("delta2", s.delta2),
                        ("epsilon", s.epsilon)):
        checks.append(Check(f"{name} > 0", value > 0, f"{name}={value}"))
    if any(not c.passed for c in checks):
        return ValidationResult(status=FAIL, checks=tuple(checks))

    boundary = abs(3.0 * s.delta1 - s.delta2) <= BOUNDARY_ATOL
    timescale_ok = 3.0 * s.delta1 < s.delta2 - BOUNDARY_ATOL
    checks.append(Check(
        "3*delta1 < delta2",
        timescale_ok,
        f"3*delta1={3.0 * s.delta1:.12g}, delta2={s.delta2:.12g}"
        + (" (boundary case)" if boundary else ""),
    ))
    checks.append(Check("delta2 <= 1", s.delta2 <= 1.0, f"delta2={s.delta2}"))
    checks.append(Check("delta1 + delta2 > 1", s.delta1 + s.delta2 > 1.0,
                        f"delta1+delta2={s.delta1 + s.delta2:.12g}"))
    checks.append(Check("delta2 > 1/2", s.delta2 > 0.5, f"delta2={s.delta2}"))
    checks.append(Check("delta2 > 2*delta1", s.delta2 > 2.0 * s.delta1,
                        f"2*delta1={2.0 * s.delta1:.12g}; "
                        "informational margin, not enforced",
                        advisory=True))

    hard_failures = [c for c in checks if not c.passed and not c.advisory]
    if not hard_failures:
        return ValidationResult(status=OK, checks=tuple(checks))
    only_boundary = boundary and all(c.name == "3*delta1 < delta2"
                                     for c in hard_failures)
    if mode == "compat" and only_boundary:
        return ValidationResult(status=WARN, checks=tuple(checks))
    return ValidationResult(status=FAIL, checks=tuple(checks))
