"""Scenario presets, a Stackelberg attacker generator and scenario files.

Scenario files are UTF-8 JSON with exactly these top-level fields::

    name      text
    outcomes  [{"label": str, "loss": number}, ...]
    actions   [{"level": number, "cost": number}, ...]
    kernel    [[prob per outcome] per action]   (row-major, actions x outcomes)
    agent     {"risk": {"kind", "params"}, "reservation": number (optional)}
    insurer   {"utility": {"kind", "params"}}

A missing ``agent.reservation`` means the reservation cost is derived from the
scenario (the minimum evaluated cost without insurance).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .contracts import AgentSpec, InsurerSpec, Scenario
from .preferences import RiskFunctional, risk_from_dict, utility_from_dict
from .riskspace import (
    ActionGrid,
    InvalidDistributionError,
    LossDistribution,
    OutcomeSpace,
    RiskKernel,
    validate_distribution,
)

MAX_BINOMIAL_N = 64


class ScenarioFileError(ValueError):
    """A scenario file could not be parsed or violates an invariant."""


def preset_two_point(
    loss: float,
    breach_probs: Sequence[float],
    costs: Sequence[float],
    agent: AgentSpec | RiskFunctional | None = None,
    name: str = "two-point",
) -> Scenario:
    """Two outcomes (no breach, breach of size ``loss``) with one breach probability per action."""
    if len(breach_probs) != len(costs):
        raise ValueError("breach probabilities and costs must be aligned")
    for p in breach_probs:
        if not (0 <= p <= 1):
            raise ValueError(f"breach probability {p} outside [0, 1]")
    space = OutcomeSpace.from_losses([0.0, loss], ["no-breach", "breach"])
    table = tuple((1.0 - p, float(p)) for p in breach_probs)
    kernel = RiskKernel(space, ActionGrid.from_costs(costs), table)
    return Scenario(name, kernel, _agent(agent))


def s1(agent: AgentSpec | RiskFunctional | None = None) -> Scenario:
    """Loss 100, breach probabilities 0.5/0.2/0.1 at investment costs 0/10/20."""
    return preset_two_point(100.0, [0.5, 0.2, 0.1], [0.0, 10.0, 20.0], agent, name="S1")


def _agent(agent) -> AgentSpec:
    if agent is None:
        return AgentSpec()
    if isinstance(agent, RiskFunctional):
        return AgentSpec(agent)
    return agent


def binomial_pmf(n: int, q: float) -> tuple[float, ...]:
    """Binomial(n, q) probabilities with coefficients from the multiplicative recurrence."""
    if not (1 <= n <= MAX_BINOMIAL_N):
        raise ValueError(f"unit count must lie in [1, {MAX_BINOMIAL_N}], got {n}")
    if not (0 <= q <= 1):
        raise ValueError(f"infection probability {q} outside [0, 1]")
    coeff = 1.0
    out = []
    for k in range(n + 1):
        if k > 0:
            coeff = coeff * (n - k + 1) / k
        out.append(coeff * q**k * (1 - q) ** (n - k))
    return tuple(out)


def preset_ransomware(
    n: int,
    infection_probs: Sequence[float],
    ransom: float,
    costs: Sequence[float],
    agent: AgentSpec | RiskFunctional | None = None,
    name: str = "ransomware",
) -> Scenario:
    """Loss ``ransom * K`` with ``K ~ Binomial(n, q(x))`` disabled units."""
    if ransom <= 0:
        raise ValueError("ransom per unit must be positive")
    if len(infection_probs) != len(costs):
        raise ValueError("infection probabilities and costs must be aligned")
    space = OutcomeSpace.from_losses([ransom * k for k in range(n + 1)], [f"k{k}" for k in range(n + 1)])
    table = tuple(binomial_pmf(n, q) for q in infection_probs)
    kernel = RiskKernel(space, ActionGrid.from_costs(costs), table)
    return Scenario(name, kernel, _agent(agent))


@dataclass(frozen=True)
class StackelbergSpec:
    """Attacker efforts with costs, the attacker's gain from a breach and ``p(action, effort)``."""

    effort_costs: tuple[float, ...]
    gain: float
    breach_table: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "effort_costs", tuple(float(c) for c in self.effort_costs))
        object.__setattr__(
            self, "breach_table", tuple(tuple(float(p) for p in row) for row in self.breach_table)
        )
        if not self.effort_costs:
            raise ValueError("attacker needs at least one effort level")
        if any(c < 0 or not math.isfinite(c) for c in self.effort_costs):
            raise ValueError("effort costs must be finite and >= 0")
        for i, row in enumerate(self.breach_table):
            if len(row) != len(self.effort_costs):
                raise ValueError(f"breach_table[{i}] has {len(row)} entries for {len(self.effort_costs)} efforts")
            if any(not (0 <= p <= 1) for p in row):
                raise ValueError(f"breach_table[{i}] has probabilities outside [0, 1]")


def attacker_best_response(spec: StackelbergSpec, x: int) -> int:
    """Effort maximizing ``gain * p(x, a) - cost(a)``; lowest effort on ties."""
    payoffs = [spec.gain * p - c for p, c in zip(spec.breach_table[x], spec.effort_costs)]
    best = max(payoffs)
    return next(a for a, v in enumerate(payoffs) if v >= best - 1e-12)


def stackelberg_kernel(
    spec: StackelbergSpec, loss: float, actions: ActionGrid
) -> tuple[RiskKernel, dict[int, int]]:
    """Two-point kernel whose breach probability follows the attacker's best response."""
    if len(spec.breach_table) != len(actions):
        raise ValueError(f"breach table has {len(spec.breach_table)} rows for {len(actions)} actions")
    responses = {x: attacker_best_response(spec, x) for x in range(len(actions))}
    space = OutcomeSpace.from_losses([0.0, loss], ["no-breach", "breach"])
    table = tuple(
        (1.0 - spec.breach_table[x][a], spec.breach_table[x][a]) for x, a in responses.items()
    )
    return RiskKernel(space, actions, table), responses


def preset_stackelberg(
    spec: StackelbergSpec,
    loss: float,
    actions: ActionGrid,
    agent: AgentSpec | RiskFunctional | None = None,
    name: str = "stackelberg",
) -> Scenario:
    kernel, _ = stackelberg_kernel(spec, loss, actions)
    return Scenario(name, kernel, _agent(agent))


# -- files -----------------------------------------------------------------

_TOP_FIELDS = {"name", "outcomes", "actions", "kernel", "agent", "insurer"}


def _fields(obj, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ScenarioFileError(f"{where}: expected an object")
    extra = set(obj) - allowed
    if extra:
        raise ScenarioFileError(f"{where}: unknown field(s) {sorted(extra)}")
    missing = required - set(obj)
    if missing:
        raise ScenarioFileError(f"{where}: missing field(s) {sorted(missing)}")


def _number(v, where: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioFileError(f"{where}: expected a number, got {v!r}")
    return float(v)


def scenario_from_dict(data: dict) -> Scenario:
    _fields(data, _TOP_FIELDS, _TOP_FIELDS, "scenario")
    name = data["name"]
    if not isinstance(name, str):
        raise ScenarioFileError("name: expected text")

    for key in ("outcomes", "actions"):
        if not isinstance(data[key], list):
            raise ScenarioFileError(f"{key}: expected a list")
    outcomes = []
    for i, o in enumerate(data["outcomes"]):
        _fields(o, {"label", "loss"}, {"label", "loss"}, f"outcomes[{i}]")
        outcomes.append((str(o["label"]), _number(o["loss"], f"outcomes[{i}].loss")))
    try:
        space = OutcomeSpace.from_losses([v for _, v in outcomes], [lab for lab, _ in outcomes])
    except ValueError as exc:
        raise ScenarioFileError(f"outcomes: {exc}") from None

    levels, costs = [], []
    for i, a in enumerate(data["actions"]):
        _fields(a, {"level", "cost"}, {"level", "cost"}, f"actions[{i}]")
        levels.append(_number(a["level"], f"actions[{i}].level"))
        costs.append(_number(a["cost"], f"actions[{i}].cost"))
    try:
        actions = ActionGrid.from_costs(costs, levels)
    except ValueError as exc:
        raise ScenarioFileError(f"actions: {exc}") from None

    rows = data["kernel"]
    if not isinstance(rows, list) or len(rows) != len(actions):
        raise ScenarioFileError(f"kernel: expected {len(actions)} rows, one per action")
    table = []
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise ScenarioFileError(f"kernel[{i}]: expected a list of probabilities")
        probs = tuple(_number(p, f"kernel[{i}][{j}]") for j, p in enumerate(row))
        report = validate_distribution(LossDistribution(space.losses, probs), len(space))
        if not report.ok:
            raise ScenarioFileError(f"kernel[{i}] (action level {levels[i]:g}): {report}")
        table.append(probs)
    kernel = RiskKernel(space, actions, tuple(table))

    agent_data = data["agent"]
    _fields(agent_data, {"risk", "reservation"}, {"risk"}, "agent")
    try:
        risk = risk_from_dict(agent_data["risk"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioFileError(f"agent.risk: {exc}") from None
    reservation = agent_data.get("reservation")
    if reservation is not None:
        reservation = _number(reservation, "agent.reservation")

    insurer_data = data["insurer"]
    _fields(insurer_data, {"utility"}, {"utility"}, "insurer")
    try:
        utility = utility_from_dict(insurer_data["utility"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioFileError(f"insurer.utility: {exc}") from None

    return Scenario(name, kernel, AgentSpec(risk, reservation), InsurerSpec(utility))


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return scenario_from_dict(data)
    except InvalidDistributionError as exc:
        raise ScenarioFileError(f"{path}: {exc}") from None
    except ScenarioFileError as exc:
        raise ScenarioFileError(f"{path}: {exc}") from None


def save_scenario(s: Scenario, path: str | Path) -> None:
    Path(path).write_text(json.dumps(s.to_dict(), indent=2) + "\n", encoding="utf-8")
