"""Insurance contracts, the two parties' outcome maps, IR and the user's best response.

Actions are referenced by their index in the scenario's :class:`ActionGrid`.
Per outcome the user's total cost is ``kappa(x) + premium + loss - indemnity``
and the insurer's profit is ``premium - indemnity``; user cost minus insurer
profit is always ``kappa(x) + loss``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Union

from .preferences import RiskFunctional, UtilityCurve, evaluate_unchecked
from .riskspace import ActionGrid, LossDistribution, OutcomeSpace, RiskKernel

TIE_TOL = 1e-9
IR_TOL = 1e-9
TIE_BREAKS = ("low", "insurer", "pessimistic")


class StaleResultError(ValueError):
    """A result was produced for a different scenario than the one supplied."""


@dataclass(frozen=True)
class Contract:
    premium: float
    indemnity: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "premium", float(self.premium))
        object.__setattr__(self, "indemnity", tuple(float(i) for i in self.indemnity))
        if not math.isfinite(self.premium) or self.premium < 0:
            raise ValueError(f"premium must be finite and >= 0, got {self.premium}")

    def check_for(self, space: OutcomeSpace) -> None:
        if len(self.indemnity) != len(space):
            raise ValueError(
                f"indemnity has {len(self.indemnity)} entries for {len(space)} outcomes"
            )
        for o, i in zip(space.outcomes, self.indemnity):
            if not (0 <= i <= o.loss):
                raise ValueError(f"indemnity {i:g} for outcome {o.label!r} outside [0, {o.loss:g}]")

    def sort_key(self) -> tuple:
        # lower premium first, then more generous coverage
        return (self.premium, -math.fsum(self.indemnity), tuple(-i for i in self.indemnity))

    def describe(self) -> str:
        return f"premium={self.premium:g} indemnity={list(self.indemnity)}"


@dataclass(frozen=True)
class LinearContract:
    """Premium plus a fixed share ``coverage`` of every loss."""

    premium: float
    coverage: float

    def __post_init__(self):
        object.__setattr__(self, "premium", float(self.premium))
        object.__setattr__(self, "coverage", float(self.coverage))
        if not math.isfinite(self.premium) or self.premium < 0:
            raise ValueError(f"premium must be finite and >= 0, got {self.premium}")
        if not (0 <= self.coverage <= 1):
            raise ValueError(f"coverage rate must lie in [0, 1], got {self.coverage}")

    def to_contract(self, space: OutcomeSpace) -> Contract:
        return Contract(self.premium, tuple(self.coverage * v for v in space.losses))

    def sort_key(self) -> tuple:
        return (self.premium, -self.coverage)

    def describe(self) -> str:
        return f"premium={self.premium:g} coverage={self.coverage:g}"


AnyContract = Union[Contract, LinearContract]

NO_INSURANCE = LinearContract(0.0, 0.0)


def as_contract(c: AnyContract, space: OutcomeSpace) -> Contract:
    out = c.to_contract(space) if isinstance(c, LinearContract) else c
    out.check_for(space)
    return out


@dataclass(frozen=True)
class AgentSpec:
    """The insuree. ``reservation=None`` means the IR threshold is derived from the scenario."""

    risk: RiskFunctional = field(default_factory=RiskFunctional.expectation)
    reservation: float | None = None

    def __post_init__(self):
        if self.reservation is not None:
            object.__setattr__(self, "reservation", float(self.reservation))
            if not math.isfinite(self.reservation):
                raise ValueError("reservation cost must be finite")


@dataclass(frozen=True)
class InsurerSpec:
    utility: UtilityCurve = field(default_factory=UtilityCurve.linear)


@dataclass(frozen=True)
class Reservation:
    value: float
    action: int | None
    derived: bool


@dataclass(frozen=True)
class Scenario:
    name: str
    kernel: RiskKernel
    agent: AgentSpec = field(default_factory=AgentSpec)
    insurer: InsurerSpec = field(default_factory=InsurerSpec)

    @property
    def space(self) -> OutcomeSpace:
        return self.kernel.space

    @property
    def actions(self) -> ActionGrid:
        return self.kernel.actions

    def with_agent(self, risk: RiskFunctional | None = None, reservation=...) -> Scenario:
        """Copy with a new risk functional and/or reservation override (``None`` = derive)."""
        agent = self.agent
        if risk is not None:
            agent = replace(agent, risk=risk)
        if reservation is not ...:
            agent = replace(agent, reservation=reservation)
        return replace(self, agent=agent)

    @cached_property
    def reservation(self) -> Reservation:
        if self.agent.reservation is not None:
            return Reservation(self.agent.reservation, None, derived=False)
        return compute_reservation(self)

    def to_dict(self) -> dict:
        agent: dict = {"risk": self.agent.risk.to_dict()}
        if self.agent.reservation is not None:
            agent["reservation"] = self.agent.reservation
        return {
            "name": self.name,
            "outcomes": [{"label": o.label, "loss": o.loss} for o in self.space.outcomes],
            "actions": [{"level": a.level, "cost": a.cost} for a in self.actions.actions],
            "kernel": [list(row) for row in self.kernel.table],
            "agent": agent,
            "insurer": {"utility": self.insurer.utility.to_dict()},
        }

    @cached_property
    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _check_action(s: Scenario, x: int) -> None:
    if not (isinstance(x, int) and 0 <= x < len(s.actions)):
        raise ValueError(f"action index {x!r} not in grid of {len(s.actions)} actions")


def user_cost_distribution(s: Scenario, c: AnyContract, x: int) -> LossDistribution:
    _check_action(s, x)
    c = as_contract(c, s.space)
    base = s.actions.actions[x].cost + c.premium
    costs = tuple(base + loss - i for loss, i in zip(s.space.losses, c.indemnity))
    return LossDistribution(costs, s.kernel.table[x])


def insurer_profit_distribution(s: Scenario, c: AnyContract, x: int) -> LossDistribution:
    _check_action(s, x)
    c = as_contract(c, s.space)
    return LossDistribution(tuple(c.premium - i for i in c.indemnity), s.kernel.table[x])


def insurer_objective(s: Scenario, c: AnyContract, x: int) -> float:
    """Expected insurer utility of profit at action ``x``."""
    _check_action(s, x)
    return _insurer_objective(s, as_contract(c, s.space), x)


def user_cost(s: Scenario, c: AnyContract, x: int) -> float:
    """The agent's evaluated cost of contract ``c`` at action ``x``."""
    _check_action(s, x)
    return _user_cost(s, as_contract(c, s.space), x)


# kernel rows are validated when the scenario is built and contracts by
# as_contract, so the solvers' inner loop skips re-validation


def _user_cost(s: Scenario, c: Contract, x: int) -> float:
    base = s.actions.actions[x].cost + c.premium
    costs = [base + loss - i for loss, i in zip(s.space.losses, c.indemnity)]
    return evaluate_unchecked(s.agent.risk, costs, s.kernel.table[x])


def _insurer_objective(s: Scenario, c: Contract, x: int) -> float:
    v = s.insurer.utility
    return math.fsum(p * v.gain(c.premium - i) for i, p in zip(c.indemnity, s.kernel.table[x]))


def compute_reservation(s: Scenario) -> Reservation:
    """Lowest evaluated cost over actions without insurance (lowest action on ties)."""
    values = [user_cost(s, NO_INSURANCE, x) for x in range(len(s.actions))]
    best = min(values)
    x = next(i for i, v in enumerate(values) if v <= best + TIE_TOL)
    return Reservation(best, x, derived=True)


@dataclass(frozen=True)
class IRCheck:
    ok: bool
    cost: float
    reservation: float

    def __bool__(self) -> bool:
        return self.ok


def ir_check(s: Scenario, c: AnyContract, x: int, reservation: float | None = None) -> IRCheck:
    threshold = s.reservation.value if reservation is None else reservation
    cost = user_cost(s, c, x)
    return IRCheck(cost <= threshold + IR_TOL, cost, threshold)


@dataclass(frozen=True)
class BestResponse:
    argmin: tuple[int, ...]
    choice: int
    costs: tuple[float, ...]

    @property
    def cost(self) -> float:
        return self.costs[self.choice]


def pick_from_argmin(argmin, objective_of, tie_break: str) -> int:
    """Representative of a best-response set under a tie-break policy."""
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"tie-break must be one of {TIE_BREAKS}, got {tie_break!r}")
    if tie_break == "low" or len(argmin) == 1:
        return argmin[0]
    values = {x: objective_of(x) for x in argmin}
    if tie_break == "insurer":
        target = max(values.values())
        return next(x for x in argmin if values[x] >= target - TIE_TOL)
    target = min(values.values())
    return next(x for x in argmin if values[x] <= target + TIE_TOL)


def argmin_set(costs) -> tuple[int, ...]:
    best = min(costs)
    return tuple(i for i, v in enumerate(costs) if v <= best + TIE_TOL)


def best_response(s: Scenario, c: AnyContract, tie_break: str = "low") -> BestResponse:
    """The user's cost-minimizing actions under ``c`` and one representative."""
    c = as_contract(c, s.space)
    costs = tuple(_user_cost(s, c, x) for x in range(len(s.actions)))
    argmin = argmin_set(costs)
    choice = pick_from_argmin(argmin, lambda x: _insurer_objective(s, c, x), tie_break)
    return BestResponse(argmin, choice, costs)


@dataclass(frozen=True)
class Intensity:
    action_gap: float
    profit_gap: float
    first_best_action: int
    response_action: int


def moral_hazard_intensity(s: Scenario, first_best, tie_break: str = "insurer") -> Intensity:
    """Gap between the first-best action and the user's own response to the first-best contract.

    A user who is indifferent between the prescribed action and others is taken
    to comply, so an incentive-compatible first best has zero intensity.
    """
    if first_best.fingerprint != s.fingerprint:
        raise StaleResultError(
            f"result fingerprint {first_best.fingerprint} does not match scenario {s.fingerprint}"
        )
    x_fb = first_best.action
    br = best_response(s, first_best.contract, tie_break)
    x_br = x_fb if x_fb in br.argmin else br.choice
    levels = s.actions.levels
    gap = abs(levels[x_fb] - levels[x_br])
    profit_gap = insurer_objective(s, first_best.contract, x_fb) - insurer_objective(
        s, first_best.contract, x_br
    )
    return Intensity(gap, profit_gap, x_fb, x_br)
