"""Global-local continuation: raise Pe^h step by step, enriching with the previous solution."""

from dataclasses import dataclass, field

import numpy as np

from gfemad.basis import EnrichmentSpec
from gfemad.diagnostics import kappa_for_peclet
from gfemad.errors import GfemError, InvalidArgumentError
from gfemad.solve import solve_gfem


@dataclass
class StepRecord:
    step: int
    pe: float
    kappa: float
    field: object


@dataclass
class ContinuationPlan:
    pe_end: float
    pe_start: float = 1.0
    n_steps: int = 8
    history: list = field(default_factory=list)

    def __post_init__(self):
        if not isinstance(self.n_steps, (int, np.integer)) or self.n_steps < 1:
            raise InvalidArgumentError("n_steps must be a positive integer")
        if not self.pe_start > 0 or self.pe_end < self.pe_start:
            raise InvalidArgumentError("need 0 < pe_start <= pe_end")

    @property
    def delta(self):
        return (self.pe_end - self.pe_start) / self.n_steps

    def pe_values(self):
        return self.pe_start + self.delta * np.arange(self.n_steps + 1)


class ContinuationError(GfemError):
    def __init__(self, step, cause):
        super().__init__(f"continuation step {step} failed: {cause}")
        self.step = step


def run_continuation(problem, mesh, plan, bc, enriched_nodes, speed=None, h=None, enriched_order=None):
    """March Pe^h from plan.pe_start to plan.pe_end by scaling kappa.

    Step 0 is a plain Galerkin solve; step i enriches enriched_nodes with
    the full step i-1 field.  Returns (final field, plan.history).
    """
    speed = problem.max_speed() if speed is None else speed
    h = float(np.max(mesh.h)) if h is None else h
    plan.history.clear()
    prev = None
    for i, pe in enumerate(plan.pe_values()):
        kappa = kappa_for_peclet(speed, h, pe)
        prob = problem.with_kappa(kappa)
        if prev is None:
            spec = EnrichmentSpec.none()
        else:
            spec = EnrichmentSpec("GlobalLocalField", enriched_nodes=enriched_nodes, carrier_field=prev)
        try:
            prev = solve_gfem(prob, mesh, spec, bc, enriched_order)
        except GfemError as exc:
            raise ContinuationError(i, exc) from exc
        plan.history.append(StepRecord(i, float(pe), kappa, prev))
    return prev, plan.history
