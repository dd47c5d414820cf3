"""Exact grid solvers for first-best and second-best insurance contracts.

Both problems are solved by exhaustive enumeration over a finite contract grid
and the scenario's action grid, so every optimum returned here is exact for
the grid it was given. Among near-equal optima (within ``TIE_TOL``) the winner
is the lexicographically smallest key, which makes the reduction independent
of evaluation order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, replace
from typing import Sequence

from .contracts import (
    IR_TOL,
    TIE_BREAKS,
    TIE_TOL,
    AnyContract,
    Contract,
    Intensity,
    LinearContract,
    Scenario,
    _insurer_objective,
    _user_cost,
    argmin_set,
    as_contract,
    moral_hazard_intensity,
    pick_from_argmin,
)
from .preferences import RiskFunctional


class InfeasibleError(Exception):
    """No contract/action pair on the grid satisfies the participation constraint."""

    def __init__(self, message: str, reservation: float | None = None):
        super().__init__(message)
        self.reservation = reservation


@dataclass(frozen=True)
class ContractGrid:
    """Finite contract space.

    ``linear`` mode is the product ``premiums x coverages`` of linear contracts.
    ``tabular`` mode is ``premiums x`` the product of per-outcome indemnity grids.
    """

    premiums: tuple[float, ...]
    coverages: tuple[float, ...] = ()
    mode: str = "linear"
    indemnities: tuple[tuple[float, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "premiums", tuple(float(p) for p in self.premiums))
        object.__setattr__(self, "coverages", tuple(float(c) for c in self.coverages))
        object.__setattr__(
            self, "indemnities", tuple(tuple(float(i) for i in g) for g in self.indemnities)
        )
        if not self.premiums:
            raise ValueError("contract grid has no premiums")
        _check_sorted(self.premiums, "premiums")
        if self.premiums[0] < 0:
            raise ValueError("premiums must be >= 0")
        if self.mode == "linear":
            if not self.coverages:
                raise ValueError("contract grid has no coverage rates")
            _check_sorted(self.coverages, "coverages")
            if self.coverages[0] < 0 or self.coverages[-1] > 1:
                raise ValueError("coverage rates must lie in [0, 1]")
        elif self.mode == "tabular":
            if not self.indemnities or any(not g for g in self.indemnities):
                raise ValueError("tabular grid needs a non-empty indemnity grid per outcome")
            for k, g in enumerate(self.indemnities):
                _check_sorted(g, f"indemnities[{k}]")
        else:
            raise ValueError(f"unknown grid mode {self.mode!r}")

    @classmethod
    def linear(cls, premiums: Sequence[float], coverages: Sequence[float]) -> ContractGrid:
        return cls(tuple(premiums), tuple(coverages))

    @classmethod
    def tabular(cls, premiums: Sequence[float], indemnities: Sequence[Sequence[float]]) -> ContractGrid:
        return cls(tuple(premiums), mode="tabular", indemnities=tuple(tuple(g) for g in indemnities))

    def contracts(self) -> list[AnyContract]:
        if self.mode == "linear":
            return [LinearContract(p, c) for p in self.premiums for c in self.coverages]
        return [
            Contract(p, schedule)
            for p in self.premiums
            for schedule in itertools.product(*self.indemnities)
        ]

    def __len__(self) -> int:
        if self.mode == "linear":
            return len(self.premiums) * len(self.coverages)
        return len(self.premiums) * math.prod(len(g) for g in self.indemnities)


def _check_sorted(values, name):
    if any(not math.isfinite(v) for v in values):
        raise ValueError(f"{name} must be finite")
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be sorted ascending")


@dataclass(frozen=True)
class DesignResult:
    kind: str
    contract: AnyContract
    action: int | float
    action_level: float
    objective: float
    user_cost: float
    reservation: float
    ir_binding: bool
    ic_satisfied: bool
    fingerprint: str
    tie_break: str = "insurer"
    intensity: Intensity | None = None

    @property
    def market_viable(self) -> bool:
        return self.objective > TIE_TOL


def select_best(candidates):
    """``candidates``: iterable of ``(value, key, payload)``; max value, then min key."""
    candidates = list(candidates)
    if not candidates:
        return None
    best = max(c[0] for c in candidates)
    return min((c for c in candidates if c[0] >= best - TIE_TOL), key=lambda c: c[1])


def _evaluate(s: Scenario, grid: ContractGrid):
    """Per contract: the checked contract, user costs per action and insurer objectives per action."""
    rows = []
    n = len(s.actions)
    for c in grid.contracts():
        try:
            checked = as_contract(c, s.space)
        except ValueError:
            # tabular schedules paying more than the loss are not admissible contracts
            continue
        costs = tuple(_user_cost(s, checked, x) for x in range(n))
        profits = tuple(_insurer_objective(s, checked, x) for x in range(n))
        rows.append((c, costs, profits))
    return rows


def _check_tie_break(tie_break):
    if tie_break not in TIE_BREAKS:
        raise ValueError(f"tie-break must be one of {TIE_BREAKS}, got {tie_break!r}")


def solve_full_info(s: Scenario, grid: ContractGrid, tie_break: str = "insurer") -> DesignResult:
    """First-best contract: the insurer picks contract and action, subject to IR only.

    Ties are broken by lower action, then lower premium, then higher coverage.
    ``tie_break`` only affects the reported best response used for the
    moral-hazard intensity.
    """
    _check_tie_break(tie_break)
    ubar = s.reservation.value
    candidates = []
    for c, costs, profits in _evaluate(s, grid):
        for x, (cost, profit) in enumerate(zip(costs, profits)):
            if cost <= ubar + IR_TOL:
                candidates.append((profit, (x, *c.sort_key()), (c, x, cost, costs)))
    chosen = select_best(candidates)
    if chosen is None:
        raise InfeasibleError(
            f"{s.name}: no contract on the grid satisfies IR (reservation {ubar:g})", ubar
        )
    profit, _, (c, x, cost, costs) = chosen
    result = DesignResult(
        kind="full",
        contract=c,
        action=x,
        action_level=s.actions.levels[x],
        objective=profit,
        user_cost=cost,
        reservation=ubar,
        ir_binding=abs(cost - ubar) <= IR_TOL,
        ic_satisfied=x in argmin_set(costs),
        fingerprint=s.fingerprint,
        tie_break=tie_break,
    )
    return replace(result, intensity=moral_hazard_intensity(s, result, tie_break))


def solve_hidden_info(s: Scenario, grid: ContractGrid, tie_break: str = "insurer") -> DesignResult:
    """Second-best contract: the action must be the user's own best response.

    ``tie_break`` picks the action inside the user's best-response set:
    ``insurer`` (in the insurer's favour), ``pessimistic`` or ``low``.
    """
    _check_tie_break(tie_break)
    ubar = s.reservation.value
    candidates = []
    for c, costs, profits in _evaluate(s, grid):
        argmin = argmin_set(costs)
        x = pick_from_argmin(argmin, lambda a: profits[a], tie_break)
        if costs[x] <= ubar + IR_TOL:
            candidates.append((profits[x], (*c.sort_key(), x), (c, x, costs[x])))
    chosen = select_best(candidates)
    if chosen is None:
        raise InfeasibleError(
            f"{s.name}: no incentive-compatible contract on the grid satisfies IR "
            f"(reservation {ubar:g})",
            ubar,
        )
    profit, _, (c, x, cost) = chosen
    return DesignResult(
        kind="hidden",
        contract=c,
        action=x,
        action_level=s.actions.levels[x],
        objective=profit,
        user_cost=cost,
        reservation=ubar,
        ir_binding=abs(cost - ubar) <= IR_TOL,
        ic_satisfied=True,
        fingerprint=s.fingerprint,
        tie_break=tie_break,
    )


@dataclass(frozen=True)
class PreferenceOption:
    label: str
    risk: RiskFunctional
    cost: float = 0.0
    status_quo: bool = False


@dataclass(frozen=True)
class PreferenceDesignSpace:
    options: tuple[PreferenceOption, ...]

    def __post_init__(self):
        options = tuple(self.options)
        object.__setattr__(self, "options", options)
        if not options:
            raise ValueError("preference design space is empty")
        labels = [o.label for o in options]
        if len(set(labels)) != len(labels):
            raise ValueError(f"preference option labels must be unique, got {labels}")
        for o in options:
            if not math.isfinite(o.cost) or o.cost < 0:
                raise ValueError(f"option {o.label!r}: shaping cost must be >= 0")
        quo = [o for o in options if o.status_quo]
        if len(quo) > 1:
            raise ValueError("at most one option may be the status quo")
        if quo and quo[0].cost != 0:
            raise ValueError("the status-quo option must have zero shaping cost")


@dataclass(frozen=True)
class PreferenceRow:
    option: PreferenceOption
    hidden: DesignResult | None
    full: DesignResult | None

    @property
    def intensity(self) -> Intensity | None:
        return self.full.intensity if self.full is not None else None

    @property
    def net_value(self) -> float | None:
        return None if self.hidden is None else self.hidden.objective - self.option.cost


@dataclass(frozen=True)
class PreferenceDesign:
    best: PreferenceRow
    rows: tuple[PreferenceRow, ...]


def solve_preference_design(
    s: Scenario, grid: ContractGrid, space: PreferenceDesignSpace, tie_break: str = "insurer"
) -> PreferenceDesign:
    """Jointly pick a costed risk preference for the user and a second-best contract.

    Each option replaces the user's risk functional; the reservation cost is
    re-derived under it unless the scenario fixes one explicitly.
    """
    rows = []
    for opt in space.options:
        s_opt = s.with_agent(risk=opt.risk)
        try:
            hidden = solve_hidden_info(s_opt, grid, tie_break)
        except InfeasibleError:
            hidden = None
        try:
            full = solve_full_info(s_opt, grid, tie_break)
        except InfeasibleError:
            full = None
        rows.append(PreferenceRow(opt, hidden, full))
    feasible = [
        (r.net_value, (r.option.cost, i), r) for i, r in enumerate(rows) if r.hidden is not None
    ]
    chosen = select_best(feasible)
    if chosen is None:
        raise InfeasibleError(f"{s.name}: infeasible under every preference option")
    return PreferenceDesign(chosen[2], tuple(rows))


@dataclass(frozen=True)
class ComparisonRow:
    kind: str
    objective: float
    gap_to_best: float
    action_level: float
    contract: str
    intensity: Intensity | None


def compare_contracts(s: Scenario, results: Sequence[DesignResult]) -> list[ComparisonRow]:
    """Tabulate results for one scenario, best objective first."""
    for r in results:
        if r.fingerprint != s.fingerprint:
            raise ValueError(
                f"result {r.kind!r} was computed for scenario {r.fingerprint}, not {s.fingerprint}"
            )
    full = [r.objective for r in results if r.kind == "full"]
    hidden = [r.objective for r in results if r.kind == "hidden"]
    if full and hidden and min(full) < max(hidden) - TIE_TOL:
        raise ValueError("first-best objective below second-best: the grids differ or a solver is wrong")
    if not results:
        return []
    top = max(r.objective for r in results)
    ordered = sorted(results, key=lambda r: (-r.objective, r.kind))
    return [
        ComparisonRow(r.kind, r.objective, top - r.objective, r.action_level, r.contract.describe(), r.intensity)
        for r in ordered
    ]
