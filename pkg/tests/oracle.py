"""Naive reference implementations used to cross-check the package.

Written from the model definitions only; nothing here imports package code.
Instances are plain dicts so the oracle cannot share state with the solvers.
"""

import math

TOL = 1e-9


def mean(values, probs):
    return math.fsum(p * v for v, p in zip(values, probs))


def avar_by_minimization(values, probs, alpha):
    return min(
        t + math.fsum(p * (v - t) for v, p in zip(values, probs) if v > t) / alpha for t in values
    )


def choquet_by_layers(values, probs, g):
    # sum over atoms of v * (g(P(Z >= v)) - g(P(Z > v)))
    total = []
    for v in sorted(set(values)):
        ge = math.fsum(p for w, p in zip(values, probs) if w >= v)
        gt = math.fsum(p for w, p in zip(values, probs) if w > v)
        total.append(v * (g(min(ge, 1.0)) - g(min(gt, 1.0))))
    return math.fsum(total)


def disutility(kind, param):
    if kind == "linear":
        return lambda c: c
    if kind == "exponential":
        return lambda c: (math.exp(param * c) - 1.0) / param
    if kind == "power":
        return lambda c: math.copysign(abs(c) ** param, c)
    raise ValueError(kind)


def evaluate(agent, values, probs):
    kind, param = agent
    if kind == "expectation":
        return mean(values, probs)
    if kind == "ed":
        u = disutility(*param)
        return math.fsum(p * u(v) for v, p in zip(values, probs))
    if kind == "avar":
        return avar_by_minimization(values, probs, param)
    if kind == "distortion":
        return choquet_by_layers(values, probs, lambda s: s**param)
    raise ValueError(kind)


def insurer_gain(insurer):
    kind, param = insurer
    if kind == "linear":
        return lambda w: w
    if kind == "exponential":
        return lambda w: -math.expm1(-param * w) / param
    raise ValueError(kind)


def _user_cost(inst, premium, coverage, x):
    values = [inst["costs"][x] + premium + l - coverage * l for l in inst["losses"]]
    return evaluate(inst["agent"], values, inst["table"][x])


def _profit(inst, premium, coverage, x):
    v = insurer_gain(inst["insurer"])
    return math.fsum(p * v(premium - coverage * l) for l, p in zip(inst["losses"], inst["table"][x]))


def reservation(inst):
    if inst.get("reservation") is not None:
        return inst["reservation"]
    return min(_user_cost(inst, 0.0, 0.0, x) for x in range(len(inst["costs"])))


def _pick(cands):
    # max value; among values within TOL of it the lexicographically smallest key
    if not cands:
        return None
    top = max(v for v, _ in cands)
    return min((c for c in cands if c[0] >= top - TOL), key=lambda c: c[1])


def best_response(inst, premium, coverage, tie="insurer"):
    n = len(inst["costs"])
    costs = [_user_cost(inst, premium, coverage, x) for x in range(n)]
    low = min(costs)
    argmin = [x for x in range(n) if costs[x] <= low + TOL]
    if tie == "low" or len(argmin) == 1:
        return argmin, argmin[0], costs
    profits = {x: _profit(inst, premium, coverage, x) for x in argmin}
    if tie == "insurer":
        top = max(profits.values())
        return argmin, next(x for x in argmin if profits[x] >= top - TOL), costs
    bottom = min(profits.values())
    return argmin, next(x for x in argmin if profits[x] <= bottom + TOL), costs


def solve(inst, tie="insurer"):
    """Returns ``(first_best, second_best)``; each is ``(objective, premium, coverage, x)`` or None."""
    ubar = reservation(inst)
    n = len(inst["costs"])
    fb, sb = [], []
    for premium in inst["premiums"]:
        for coverage in inst["coverages"]:
            for x in range(n):
                if _user_cost(inst, premium, coverage, x) <= ubar + TOL:
                    obj = _profit(inst, premium, coverage, x)
                    fb.append((obj, (x, premium, -coverage)))
            _, x, costs = best_response(inst, premium, coverage, tie)
            if costs[x] <= ubar + TOL:
                sb.append((_profit(inst, premium, coverage, x), (premium, -coverage, x)))

    def unpack(c, order):
        if c is None:
            return None
        key = dict(zip(order, c[1]))
        return (c[0], key["p"], -key["c"], key["x"])

    return unpack(_pick(fb), ("x", "p", "c")), unpack(_pick(sb), ("p", "c", "x"))


def intensity(inst, fb, tie="insurer"):
    """Action-level and profit gaps between the first-best action and the response to its contract."""
    _, premium, coverage, x_fb = fb
    argmin, choice, _ = best_response(inst, premium, coverage, tie)
    x_br = x_fb if x_fb in argmin else choice
    levels = inst.get("levels") or list(range(len(inst["costs"])))
    return (
        abs(levels[x_fb] - levels[x_br]),
        _profit(inst, premium, coverage, x_fb) - _profit(inst, premium, coverage, x_br),
    )


def s1_instance(agent, premiums, coverages):
    return {
        "losses": [0.0, 100.0],
        "costs": [0.0, 10.0, 20.0],
        "table": [[0.5, 0.5], [0.8, 0.2], [0.9, 0.1]],
        "agent": agent,
        "insurer": ("linear", None),
        "premiums": list(premiums),
        "coverages": list(coverages),
    }
