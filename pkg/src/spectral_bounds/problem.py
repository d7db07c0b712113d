"""Weighted Neumann eigenvalue problems.

The quadratic form is

    Q(phi) = integral over Omega of (|grad phi|^2 + V phi^2) w e^(-2 rho)

against the mass integral of phi^2 e^(-2 rho).  Its eigenvalues depend on
the weight w > 0, the log-density rho and the potential V.  The effective
potential V + |grad rho|^2 is what enters all shifted spectral bounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .domains import Domain, QuadratureGrid, mean_value
from .expressions import ScalarFieldExpr, const, differentiate, parse_field

__all__ = ["ProblemSpec", "effective_potential"]

_VALIDATION_NODES = 13  # per axis, for the cheap positivity screen


@dataclass(frozen=True)
class ProblemSpec:
    """A weighted Neumann problem on a domain.

    w, rho, V may be given as expression source strings or parsed
    expressions; omitted fields default to w = 1, rho = 0, V = 0.
    """

    domain: Domain
    w: ScalarFieldExpr = None
    rho: ScalarFieldExpr = None
    V: ScalarFieldExpr = None
    label: str = ""

    def __post_init__(self):
        nu = self.domain.nu
        for name, default in (("w", "1"), ("rho", "0"), ("V", "0")):
            value = getattr(self, name)
            if value is None:
                value = parse_field(default, nu)
            elif isinstance(value, str):
                value = parse_field(value, nu)
            object.__setattr__(self, name, value)
        self._check_weight_positive()

    @property
    def nu(self) -> int:
        return self.domain.nu

    def _check_weight_positive(self):
        grid = QuadratureGrid(self.domain, _VALIDATION_NODES)
        w_vals = grid.inside_values(self.w)
        if w_vals.min() <= 0:
            raise ValueError(
                f"weight w must be strictly positive on the domain; "
                f"sampled minimum {w_vals.min():.3g}")

    def effective_potential(self) -> ScalarFieldExpr:
        return effective_potential(self)

    def mean_w(self, grid: QuadratureGrid) -> float:
        """Mean of w over the domain."""
        return mean_value(self.w, grid)

    def mean_veff_w(self, grid: QuadratureGrid) -> float:
        """Mean of (V + |grad rho|^2) w over the domain."""
        return mean_value(self.effective_potential() * self.w, grid)


def effective_potential(problem: ProblemSpec) -> ScalarFieldExpr:
    """V + |grad rho|^2 as a symbolic expression."""
    grad_sq: ScalarFieldExpr = const(0.0)
    for axis in range(problem.nu):
        d = differentiate(problem.rho, axis)
        grad_sq = grad_sq + d * d
    return problem.V + grad_sq
