"""Finite probability spaces of residual cyber losses.

Holds the outcome space, discrete loss distributions, the investment grid and
the investment-indexed distribution family (the risk kernel), together with
first-order stochastic dominance checks on them.

Dominance direction: ``fosd_dominates(d1, d2)`` is true when the CDF of ``d1``
lies below the CDF of ``d2`` everywhere, i.e. ``d1`` puts more weight on
severe losses. A well-behaved kernel therefore has lower investment levels
dominating higher ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

PROB_TOL = 1e-12
CDF_TOL = 1e-12


class InvalidDistributionError(ValueError):
    """Raised when an operation needs a well-formed distribution and gets another."""


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "ok" if self.ok else "; ".join(self.violations)


@dataclass(frozen=True)
class Outcome:
    label: str
    loss: float


@dataclass(frozen=True)
class OutcomeSpace:
    outcomes: tuple[Outcome, ...]

    def __post_init__(self):
        outcomes = tuple(
            o if isinstance(o, Outcome) else Outcome(str(o[0]), float(o[1])) for o in self.outcomes
        )
        object.__setattr__(self, "outcomes", outcomes)
        if not outcomes:
            raise ValueError("outcome space needs at least one outcome")
        labels = [o.label for o in outcomes]
        if len(set(labels)) != len(labels):
            raise ValueError(f"outcome labels must be unique, got {labels}")
        for o in outcomes:
            if not math.isfinite(o.loss) or o.loss < 0:
                raise ValueError(f"outcome {o.label!r}: loss must be finite and >= 0, got {o.loss}")

    @classmethod
    def from_losses(cls, losses: Iterable[float], labels: Iterable[str] | None = None) -> OutcomeSpace:
        losses = [float(v) for v in losses]
        if labels is None:
            labels = [f"o{i}" for i in range(len(losses))]
        return cls(tuple(Outcome(lab, v) for lab, v in zip(labels, losses, strict=True)))

    @property
    def losses(self) -> tuple[float, ...]:
        return tuple(o.loss for o in self.outcomes)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(o.label for o in self.outcomes)

    def __len__(self) -> int:
        return len(self.outcomes)


@dataclass(frozen=True)
class LossDistribution:
    """A finite distribution over money values (losses, costs or profits).

    Construction does not validate; use :func:`validate_distribution` for a
    report or :meth:`checked` to raise on a malformed distribution.
    """

    values: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))

    @classmethod
    def on(cls, space: OutcomeSpace, probs: Sequence[float]) -> LossDistribution:
        return cls(space.losses, tuple(probs))

    @classmethod
    def point_mass(cls, value: float) -> LossDistribution:
        return cls((value,), (1.0,))

    def checked(self) -> LossDistribution:
        report = validate_distribution(self)
        if not report.ok:
            raise InvalidDistributionError(str(report))
        return self

    def mean(self) -> float:
        return math.fsum(p * v for p, v in zip(self.probs, self.values))

    def map(self, fn) -> LossDistribution:
        return LossDistribution(tuple(fn(v) for v in self.values), self.probs)

    def __len__(self) -> int:
        return len(self.values)


def validate_distribution(d: LossDistribution, n_outcomes: int | None = None) -> ValidationReport:
    """Check a distribution; never raises."""
    problems: list[str] = []
    expected = len(d.values) if n_outcomes is None else n_outcomes
    if len(d.probs) != expected or len(d.values) != expected:
        problems.append(f"length mismatch: {len(d.probs)} probabilities for {expected} outcomes")
    if not d.probs:
        problems.append("empty distribution")
    for i, p in enumerate(d.probs):
        if not math.isfinite(p):
            problems.append(f"non-finite probability at {i}")
        elif p < 0:
            problems.append(f"negative probability at {i}: {p:g}")
        elif p > 1:
            problems.append(f"probability above 1 at {i}: {p:g}")
    for i, v in enumerate(d.values):
        if not math.isfinite(v):
            problems.append(f"non-finite value at {i}")
    total = math.fsum(d.probs)
    if math.isfinite(total) and abs(total - 1.0) > PROB_TOL:
        problems.append(f"sum = {total:.12g}")
    return ValidationReport(tuple(problems))


def cdf(d: LossDistribution) -> list[tuple[float, float]]:
    """Step CDF as ``(threshold, P(Z <= threshold))`` over the distinct values."""
    d.checked()
    merged: dict[float, float] = {}
    for v, p in zip(d.values, d.probs):
        merged[v] = merged.get(v, 0.0) + p
    out = []
    acc = []
    for v in sorted(merged):
        acc.append(merged[v])
        out.append((v, math.fsum(acc)))
    return out


def _cdf_at(steps: list[tuple[float, float]], t: float) -> float:
    value = 0.0
    for threshold, cum in steps:
        if threshold <= t:
            value = cum
        else:
            break
    return value


def fosd_dominates(d1: LossDistribution, d2: LossDistribution) -> bool:
    """True iff the CDF of ``d1`` is pointwise below that of ``d2`` (``d1`` is the severer loss)."""
    c1, c2 = cdf(d1), cdf(d2)
    support = sorted({t for t, _ in c1} | {t for t, _ in c2})
    return all(_cdf_at(c1, t) <= _cdf_at(c2, t) + CDF_TOL for t in support)


@dataclass(frozen=True)
class Action:
    level: float
    cost: float


@dataclass(frozen=True)
class ActionGrid:
    actions: tuple[Action, ...]

    def __post_init__(self):
        actions = tuple(
            a if isinstance(a, Action) else Action(float(a[0]), float(a[1])) for a in self.actions
        )
        object.__setattr__(self, "actions", actions)
        if not actions:
            raise ValueError("action grid must be non-empty")
        for a in actions:
            if not (math.isfinite(a.level) and math.isfinite(a.cost)):
                raise ValueError(f"action {a}: level and cost must be finite")
            if a.cost < 0:
                raise ValueError(f"action at level {a.level:g}: cost must be >= 0, got {a.cost:g}")
        for prev, nxt in zip(actions, actions[1:]):
            if not nxt.level > prev.level:
                raise ValueError("action levels must be strictly increasing")

    @classmethod
    def from_costs(cls, costs: Sequence[float], levels: Sequence[float] | None = None) -> ActionGrid:
        if levels is None:
            levels = range(len(costs))
        return cls(tuple(Action(float(x), float(k)) for x, k in zip(levels, costs, strict=True)))

    @property
    def levels(self) -> tuple[float, ...]:
        return tuple(a.level for a in self.actions)

    @property
    def costs(self) -> tuple[float, ...]:
        return tuple(a.cost for a in self.actions)

    def index_of(self, level: float) -> int:
        for i, a in enumerate(self.actions):
            if a.level == level:
                return i
        raise KeyError(f"action level {level!r} not in grid {self.levels}")

    def __len__(self) -> int:
        return len(self.actions)


@dataclass(frozen=True)
class RiskKernel:
    """One loss distribution per investment action, all over the same outcome space."""

    space: OutcomeSpace
    actions: ActionGrid
    table: tuple[tuple[float, ...], ...]
    _monotone: bool = field(default=False, init=False, repr=False, compare=False)

    def __post_init__(self):
        table = tuple(tuple(float(p) for p in row) for row in self.table)
        object.__setattr__(self, "table", table)
        report = self.validate()
        if not report.ok:
            raise InvalidDistributionError(str(report))
        object.__setattr__(self, "_monotone", check_kernel_monotone(self).ok)

    def validate(self) -> ValidationReport:
        problems = []
        if len(self.table) != len(self.actions):
            problems.append(f"kernel has {len(self.table)} rows for {len(self.actions)} actions")
        for i, row in enumerate(self.table):
            rep = validate_distribution(LossDistribution(self.space.losses, row), len(self.space))
            problems.extend(f"kernel[{i}]: {v}" for v in rep.violations)
        return ValidationReport(tuple(problems))

    def row(self, index: int) -> LossDistribution:
        return LossDistribution(self.space.losses, self.table[index])

    @property
    def fosd_monotone(self) -> bool:
        return self._monotone


def check_kernel_monotone(k: RiskKernel) -> ValidationReport:
    """Every lower-investment row must dominate every higher-investment row."""
    problems = []
    n = len(k.actions)
    for i in range(n):
        for j in range(i + 1, n):
            if not fosd_dominates(k.row(i), k.row(j)):
                problems.append(
                    f"pair ({k.actions.levels[i]:g}, {k.actions.levels[j]:g}): "
                    "higher investment does not reduce severe-loss likelihood"
                )
    return ValidationReport(tuple(problems))
