"""Risk-preference evaluation over finite cost distributions.

All functionals work in the cost convention: larger values are worse. The
supported kinds are the plain expectation, expected disutility under a
:class:`UtilityCurve`, average value-at-risk at a tail level ``alpha`` and
a distortion (probability-weighting) Choquet valuation.

Utility curves are stored as *disutility over cost*. The gain-oriented
equivalent of a curve ``u`` is ``v(w) = -u(-w)``; it is used wherever a gain
utility is needed (the insurer's profit utility, Arrow-Pratt coefficients).
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .riskspace import LossDistribution

_KNOT_TOL = 1e-12


def _interp(knots: tuple[tuple[float, float], ...], x: float) -> float:
    xs = [k[0] for k in knots]
    if x < xs[0] - _KNOT_TOL or x > xs[-1] + _KNOT_TOL:
        raise ValueError(f"{x:g} outside tabulated domain [{xs[0]:g}, {xs[-1]:g}]")
    j = min(max(bisect.bisect_right(xs, x), 1), len(xs) - 1)
    (x0, y0), (x1, y1) = knots[j - 1], knots[j]
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def _check_knots(knots, name: str) -> tuple[tuple[float, float], ...]:
    knots = tuple((float(a), float(b)) for a, b in knots)
    if len(knots) < 2:
        raise ValueError(f"{name}: need at least two knots")
    for (x0, y0), (x1, y1) in zip(knots, knots[1:]):
        if not x1 > x0:
            raise ValueError(f"{name}: knot abscissae must be strictly increasing")
        if y1 < y0:
            raise ValueError(f"{name}: knot values must be non-decreasing")
    return knots


@dataclass(frozen=True)
class UtilityCurve:
    """Disutility over cost: ``linear``, ``exponential``, ``power`` or ``tabulated``.

    ``exponential`` is ``(exp(gamma*c) - 1) / gamma``; ``power`` is the odd
    extension ``sign(c) * |c|**eta``; ``tabulated`` interpolates linearly.
    """

    kind: str = "linear"
    param: float | None = None
    knots: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind == "linear":
            pass
        elif self.kind in ("exponential", "power"):
            if self.param is None or not math.isfinite(self.param) or self.param <= 0:
                raise ValueError(f"{self.kind} curve needs a positive parameter, got {self.param}")
            object.__setattr__(self, "param", float(self.param))
        elif self.kind == "tabulated":
            object.__setattr__(self, "knots", _check_knots(self.knots or (), "tabulated curve"))
        else:
            raise ValueError(f"unknown utility kind {self.kind!r}")

    @classmethod
    def linear(cls) -> UtilityCurve:
        return cls("linear")

    @classmethod
    def exponential(cls, gamma: float) -> UtilityCurve:
        return cls("exponential", gamma)

    @classmethod
    def power(cls, eta: float) -> UtilityCurve:
        return cls("power", eta)

    @classmethod
    def tabulated(cls, knots: Sequence[tuple[float, float]]) -> UtilityCurve:
        return cls("tabulated", knots=tuple(knots))

    @property
    def is_closed_form(self) -> bool:
        return self.kind != "tabulated"

    def __call__(self, c: float) -> float:
        if self.kind == "linear":
            return c
        if self.kind == "exponential":
            return math.expm1(self.param * c) / self.param
        if self.kind == "power":
            return math.copysign(abs(c) ** self.param, c)
        return _interp(self.knots, c)

    def derivative(self, c: float) -> float:
        if self.kind == "linear":
            return 1.0
        if self.kind == "exponential":
            return math.exp(self.param * c)
        if self.kind == "power":
            if c == 0 and self.param < 1:
                raise ValueError("power curve with eta < 1 is not differentiable at 0")
            return self.param * abs(c) ** (self.param - 1)
        raise ValueError("tabulated curves have no closed-form derivative")

    def second_derivative(self, c: float) -> float:
        if self.kind == "linear":
            return 0.0
        if self.kind == "exponential":
            return self.param * math.exp(self.param * c)
        if self.kind == "power":
            eta = self.param
            if c == 0 and eta <= 2 and eta != 1:
                raise ValueError("power curve is not twice differentiable at 0")
            return math.copysign(eta * (eta - 1) * abs(c) ** (eta - 2), c) if eta != 1 else 0.0
        raise ValueError("tabulated curves have no closed-form derivative")

    def gain(self, w: float) -> float:
        """Gain-oriented equivalent ``-u(-w)``."""
        return -self(-w)

    def to_dict(self) -> dict:
        if self.kind == "linear":
            params = {}
        elif self.kind == "exponential":
            params = {"gamma": self.param}
        elif self.kind == "power":
            params = {"eta": self.param}
        else:
            params = {"knots": [list(k) for k in self.knots]}
        return {"kind": self.kind, "params": params}


@dataclass(frozen=True)
class DistortionFunction:
    """Probability weighting ``g: [0, 1] -> [0, 1]`` with ``g(0) = 0`` and ``g(1) = 1``."""

    kind: str = "identity"
    param: float | None = None
    knots: tuple[tuple[float, float], ...] | None = None

    def __post_init__(self):
        if self.kind == "identity":
            pass
        elif self.kind == "power":
            if self.param is None or not math.isfinite(self.param) or self.param <= 0:
                raise ValueError(f"power distortion needs beta > 0, got {self.param}")
            object.__setattr__(self, "param", float(self.param))
        elif self.kind == "tabulated":
            knots = _check_knots(self.knots or (), "tabulated distortion")
            if knots[0] != (0.0, 0.0) or knots[-1] != (1.0, 1.0):
                raise ValueError("tabulated distortion must start at (0, 0) and end at (1, 1)")
            object.__setattr__(self, "knots", knots)
        else:
            raise ValueError(f"unknown distortion kind {self.kind!r}")

    @classmethod
    def identity(cls) -> DistortionFunction:
        return cls("identity")

    @classmethod
    def power(cls, beta: float) -> DistortionFunction:
        return cls("power", beta)

    @classmethod
    def tabulated(cls, knots: Sequence[tuple[float, float]]) -> DistortionFunction:
        return cls("tabulated", knots=tuple(knots))

    def __call__(self, u: float) -> float:
        u = min(max(u, 0.0), 1.0)
        if self.kind == "identity":
            return u
        if self.kind == "power":
            return u**self.param
        return _interp(self.knots, u)

    def to_dict(self) -> dict:
        if self.kind == "identity":
            params = {}
        elif self.kind == "power":
            params = {"beta": self.param}
        else:
            params = {"knots": [list(k) for k in self.knots]}
        return {"kind": self.kind, "params": params}


@dataclass(frozen=True)
class RiskFunctional:
    kind: str = "expectation"
    alpha: float | None = None
    curve: UtilityCurve | None = None
    g: DistortionFunction | None = None

    def __post_init__(self):
        if self.kind == "expectation":
            pass
        elif self.kind == "expected_disutility":
            if not isinstance(self.curve, UtilityCurve):
                raise ValueError("expected_disutility needs a UtilityCurve")
        elif self.kind == "avar":
            if self.alpha is None or not (0 < self.alpha <= 1):
                raise ValueError(f"AV@R level must lie in (0, 1], got {self.alpha}")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.kind == "distortion":
            if not isinstance(self.g, DistortionFunction):
                raise ValueError("distortion functional needs a DistortionFunction")
        else:
            raise ValueError(f"unknown risk functional kind {self.kind!r}")

    @classmethod
    def expectation(cls) -> RiskFunctional:
        return cls("expectation")

    @classmethod
    def expected_disutility(cls, curve: UtilityCurve) -> RiskFunctional:
        return cls("expected_disutility", curve=curve)

    @classmethod
    def avar(cls, alpha: float) -> RiskFunctional:
        return cls("avar", alpha=alpha)

    @classmethod
    def distortion(cls, g: DistortionFunction) -> RiskFunctional:
        return cls("distortion", g=g)

    def __call__(self, d: LossDistribution) -> float:
        return evaluate_risk(self, d)

    def describe(self) -> str:
        if self.kind == "avar":
            return f"avar({self.alpha:g})"
        if self.kind == "expected_disutility":
            return f"expected_disutility({self.curve.kind})"
        if self.kind == "distortion":
            return f"distortion({self.g.kind})"
        return self.kind

    def to_dict(self) -> dict:
        if self.kind == "expectation":
            params = {}
        elif self.kind == "expected_disutility":
            params = {"curve": self.curve.to_dict()}
        elif self.kind == "avar":
            params = {"alpha": self.alpha}
        else:
            params = {"g": self.g.to_dict()}
        return {"kind": self.kind, "params": params}


def evaluate_risk(f: RiskFunctional, d: LossDistribution) -> float:
    d.checked()
    return evaluate_unchecked(f, d.values, d.probs)


def evaluate_unchecked(f: RiskFunctional, values: Sequence[float], probs: Sequence[float]) -> float:
    """:func:`evaluate_risk` for callers that already hold a valid distribution."""
    if f.kind == "expectation":
        return math.fsum(p * v for p, v in zip(probs, values))
    if f.kind == "expected_disutility":
        return math.fsum(p * f.curve(c) for p, c in zip(probs, values))
    if f.kind == "avar":
        return _avar_tail(values, probs, f.alpha)
    return _choquet(values, probs, f.g)


def _check_alpha(alpha: float) -> None:
    if not (0 < alpha <= 1):
        raise ValueError(f"AV@R level must lie in (0, 1], got {alpha}")


def avar(d: LossDistribution, alpha: float) -> float:
    """Mean of the worst ``alpha`` probability mass (sorted-tail formula)."""
    _check_alpha(alpha)
    d.checked()
    return _avar_tail(d.values, d.probs, alpha)


def _avar_tail(values, probs, alpha):
    atoms = sorted(zip(values, probs), key=lambda a: a[0], reverse=True)
    taken = 0.0
    parts = []
    for v, p in atoms:
        if taken >= alpha:
            break
        w = min(p, alpha - taken)
        parts.append(w * v)
        taken += w
    if taken < alpha:
        # probabilities summed just short of alpha (alpha ~ 1); the missing sliver sits at the minimum
        parts.append((alpha - taken) * atoms[-1][0])
    return math.fsum(parts) / alpha


def avar_minimization(d: LossDistribution, alpha: float) -> float:
    """``min_t t + E[(Z - t)^+] / alpha`` searched over the support points."""
    _check_alpha(alpha)
    d.checked()
    best = math.inf
    for t in set(d.values):
        excess = math.fsum(p * (v - t) for v, p in zip(d.values, d.probs) if v > t)
        best = min(best, t + excess / alpha)
    return best


def choquet_distortion(d: LossDistribution, g: DistortionFunction) -> float:
    """Discrete Choquet integral ``v1 + sum_j (v_j - v_{j-1}) g(P(Z >= v_j))``."""
    d.checked()
    return _choquet(d.values, d.probs, g)


def _choquet(values, probs, g):
    merged: dict[float, float] = {}
    for v, p in zip(values, probs):
        merged[v] = merged.get(v, 0.0) + p
    vs = sorted(merged)
    # decumulative P(Z >= v_j), built from the top so small tails stay exact
    tails = [0.0] * len(vs)
    acc = []
    for j in range(len(vs) - 1, -1, -1):
        acc.append(merged[vs[j]])
        tails[j] = min(math.fsum(acc), 1.0)
    parts = [vs[0]]
    parts.extend((vs[j] - vs[j - 1]) * g(tails[j]) for j in range(1, len(vs)))
    return math.fsum(parts)


def arrow_pratt(u: UtilityCurve | Callable[[float], float], z: float, h: float = 1e-3) -> float:
    """Absolute risk aversion.

    For a :class:`UtilityCurve` (disutility over cost) ``z`` is a cost level and
    the result is ``u''(z) / u'(z)``, which equals ``-v''(w) / v'(w)`` for the
    gain-equivalent ``v(w) = -u(-w)`` at ``w = -z``. A plain callable is read
    as a gain utility and differentiated numerically: ``-u''(z) / u'(z)``.
    """
    if isinstance(u, UtilityCurve):
        if u.is_closed_form:
            d1, d2 = u.derivative(z), u.second_derivative(z)
        else:
            xs = [k[0] for k in u.knots]
            if h <= 0:
                raise ValueError("step h must be positive")
            if not (xs[0] < z - h and z + h < xs[-1]):
                raise ValueError(f"z={z:g} (with step {h:g}) not interior to the tabulated knots")
            d1 = (u(z + h) - u(z - h)) / (2 * h)
            d2 = (u(z + h) - 2 * u(z) + u(z - h)) / (h * h)
        if d1 == 0:
            raise ValueError(f"marginal disutility vanishes at {z:g}")
        return d2 / d1
    if h <= 0:
        raise ValueError("step h must be positive")
    d1 = (u(z + h) - u(z - h)) / (2 * h)
    d2 = (u(z + h) - 2 * u(z) + u(z - h)) / (h * h)
    if d1 == 0:
        raise ValueError(f"marginal utility vanishes at {z:g}")
    return -d2 / d1


def risk_from_dict(data: dict) -> RiskFunctional:
    kind, params = data["kind"], dict(data.get("params", {}))
    if kind == "expectation":
        _no_extra(params, set(), "risk")
        return RiskFunctional.expectation()
    if kind == "expected_disutility":
        _no_extra(params, {"curve"}, "risk")
        return RiskFunctional.expected_disutility(utility_from_dict(params["curve"]))
    if kind == "avar":
        _no_extra(params, {"alpha"}, "risk")
        return RiskFunctional.avar(float(params["alpha"]))
    if kind == "distortion":
        _no_extra(params, {"g"}, "risk")
        return RiskFunctional.distortion(distortion_from_dict(params["g"]))
    raise ValueError(f"unknown risk functional kind {kind!r}")


def utility_from_dict(data: dict) -> UtilityCurve:
    kind, params = data["kind"], dict(data.get("params", {}))
    if kind == "linear":
        _no_extra(params, set(), "utility")
        return UtilityCurve.linear()
    if kind == "exponential":
        _no_extra(params, {"gamma"}, "utility")
        return UtilityCurve.exponential(float(params["gamma"]))
    if kind == "power":
        _no_extra(params, {"eta"}, "utility")
        return UtilityCurve.power(float(params["eta"]))
    if kind == "tabulated":
        _no_extra(params, {"knots"}, "utility")
        return UtilityCurve.tabulated([tuple(k) for k in params["knots"]])
    raise ValueError(f"unknown utility kind {kind!r}")


def distortion_from_dict(data: dict) -> DistortionFunction:
    kind, params = data["kind"], dict(data.get("params", {}))
    if kind == "identity":
        _no_extra(params, set(), "distortion")
        return DistortionFunction.identity()
    if kind == "power":
        _no_extra(params, {"beta"}, "distortion")
        return DistortionFunction.power(float(params["beta"]))
    if kind == "tabulated":
        _no_extra(params, {"knots"}, "distortion")
        return DistortionFunction.tabulated([tuple(k) for k in params["knots"]])
    raise ValueError(f"unknown distortion kind {kind!r}")


def _no_extra(params: dict, allowed: set, where: str) -> None:
    extra = set(params) - allowed
    if extra:
        raise ValueError(f"{where}: unknown parameter(s) {sorted(extra)}")
    missing = allowed - set(params)
    if missing:
        raise ValueError(f"{where}: missing parameter(s) {sorted(missing)}")
