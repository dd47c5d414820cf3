"""First-order approach for smooth one-dimensional families.

The user picks a continuous investment ``x`` in ``[x_lo, x_hi]``; a breach
costs ``loss`` with probability ``breach_prob(x)`` and investing costs
``cost(x)``. Under a linear contract the incentive constraint is replaced by
the stationarity condition ``dC/dx = 0`` on the user's evaluated cost, which is
only valid when that derivative is monotone on the interval. This is checked
by sampling before every inner solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from .contracts import IR_TOL, LinearContract
from .preferences import RiskFunctional, UtilityCurve
from .solvers import ContractGrid, DesignResult, InfeasibleError, select_best

STATIONARY_TOL = 1e-8
MONOTONE_SAMPLES = 201


class FirstOrderInvalidError(ValueError):
    """The cost derivative is not monotone, so stationarity does not characterize the response."""


def _central(fn, x, h):
    return (fn(x + h) - fn(x - h)) / (2 * h)


@dataclass(frozen=True)
class SmoothFamily:
    loss: float
    breach_prob: Callable[[float], float]
    cost: Callable[[float], float]
    x_lo: float
    x_hi: float
    agent: RiskFunctional = field(default_factory=RiskFunctional.expectation)
    insurer: UtilityCurve = field(default_factory=UtilityCurve.linear)
    breach_prob_slope: Callable[[float], float] | None = None
    cost_slope: Callable[[float], float] | None = None
    reservation: float | None = None
    fd_step: float = 1e-6
    name: str = "family"

    def __post_init__(self):
        if not self.x_hi > self.x_lo:
            raise ValueError("need x_lo < x_hi")
        if self.agent.kind not in ("expectation", "expected_disutility"):
            raise ValueError("first-order families support expectation or expected-disutility agents")

    def _u(self, c):
        return c if self.agent.kind == "expectation" else self.agent.curve(c)

    def _du(self, c):
        if self.agent.kind == "expectation":
            return 1.0
        curve = self.agent.curve
        if curve.is_closed_form:
            return curve.derivative(c)
        return _central(curve, c, self.fd_step)

    def _slopes(self, x):
        dp = self.breach_prob_slope(x) if self.breach_prob_slope else _central(self.breach_prob, x, self.fd_step)
        dk = self.cost_slope(x) if self.cost_slope else _central(self.cost, x, self.fd_step)
        return dp, dk

    def user_cost(self, contract: LinearContract, x: float) -> float:
        p = self.breach_prob(x)
        safe = self.cost(x) + contract.premium
        hit = safe + (1 - contract.coverage) * self.loss
        return (1 - p) * self._u(safe) + p * self._u(hit)

    def cost_derivative(self, contract: LinearContract, x: float) -> float:
        p = self.breach_prob(x)
        dp, dk = self._slopes(x)
        safe = self.cost(x) + contract.premium
        hit = safe + (1 - contract.coverage) * self.loss
        return dk * ((1 - p) * self._du(safe) + p * self._du(hit)) + dp * (self._u(hit) - self._u(safe))

    def insurer_objective(self, contract: LinearContract, x: float) -> float:
        p = self.breach_prob(x)
        v = self.insurer.gain
        return (1 - p) * v(contract.premium) + p * v(contract.premium - contract.coverage * self.loss)


def inner_response(family: SmoothFamily, contract: LinearContract) -> float:
    """The user's investment from stationarity, clamped to the interval."""
    lo, hi = family.x_lo, family.x_hi
    xs = [lo + (hi - lo) * k / (MONOTONE_SAMPLES - 1) for k in range(MONOTONE_SAMPLES)]
    ds = [family.cost_derivative(contract, x) for x in xs]
    scale = max(1.0, max(abs(d) for d in ds))
    for (x0, d0), (x1, d1) in zip(zip(xs, ds), zip(xs[1:], ds[1:])):
        if d1 < d0 - 1e-9 * scale:
            raise FirstOrderInvalidError(
                f"{family.name}: cost derivative decreases between x={x0:g} and x={x1:g} "
                f"under {contract.describe()}"
            )
    if ds[0] >= 0:
        return lo
    if ds[-1] <= 0:
        return hi
    a, b = lo, hi
    mid = 0.5 * (a + b)
    for _ in range(200):
        mid = 0.5 * (a + b)
        d = family.cost_derivative(contract, mid)
        if abs(d) <= STATIONARY_TOL:
            break
        if d > 0:
            b = mid
        else:
            a = mid
        if b - a <= 4 * math.ulp(mid):
            break
    return mid


def family_reservation(family: SmoothFamily) -> float:
    if family.reservation is not None:
        return family.reservation
    none = LinearContract(0.0, 0.0)
    return family.user_cost(none, inner_response(family, none))


@dataclass(frozen=True)
class FirstOrderPoint:
    contract: LinearContract
    action: float
    user_cost: float
    objective: float
    feasible: bool


def first_order_table(family: SmoothFamily, grid: ContractGrid) -> list[FirstOrderPoint]:
    if grid.mode != "linear":
        raise ValueError("the first-order solver works on linear contract grids")
    ubar = family_reservation(family)
    out = []
    for c in grid.contracts():
        x = inner_response(family, c)
        cost = family.user_cost(c, x)
        out.append(FirstOrderPoint(c, x, cost, family.insurer_objective(c, x), cost <= ubar + IR_TOL))
    return out


def solve_first_order(family: SmoothFamily, grid: ContractGrid) -> DesignResult:
    """Second-best linear contract with the incentive constraint replaced by stationarity."""
    ubar = family_reservation(family)
    table = first_order_table(family, grid)
    chosen = select_best((pt.objective, pt.contract.sort_key(), pt) for pt in table if pt.feasible)
    if chosen is None:
        raise InfeasibleError(f"{family.name}: no contract on the grid satisfies IR", ubar)
    pt = chosen[2]
    return DesignResult(
        kind="first-order",
        contract=pt.contract,
        action=pt.action,
        action_level=pt.action,
        objective=pt.objective,
        user_cost=pt.user_cost,
        reservation=ubar,
        ir_binding=abs(pt.user_cost - ubar) <= IR_TOL,
        ic_satisfied=True,
        fingerprint=f"family:{family.name}",
    )


def exponential_breach_family(
    loss: float = 100.0,
    scale: float = 0.5,
    rate: float = 1.0,
    unit_cost: float = 10.0,
    x_range: tuple[float, float] = (0.0, 5.0),
    agent: RiskFunctional | None = None,
    reservation: float | None = None,
    name: str = "exponential-breach",
) -> SmoothFamily:
    """Breach probability ``scale * exp(-rate x)`` with linear investment cost ``unit_cost * x``."""
    return SmoothFamily(
        loss=loss,
        breach_prob=lambda x: scale * math.exp(-rate * x),
        cost=lambda x: unit_cost * x,
        x_lo=x_range[0],
        x_hi=x_range[1],
        agent=agent or RiskFunctional.expectation(),
        breach_prob_slope=lambda x: -rate * scale * math.exp(-rate * x),
        cost_slope=lambda x: unit_cost,
        reservation=reservation,
        name=name,
    )
