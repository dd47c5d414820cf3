"""Command-line front end.

Exit codes: 0 solved (or valid), 1 usage or input error, 2 infeasible grid.
Nothing is written to ``--out`` unless the command succeeds.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from .contracts import LinearContract, Scenario
from .firstorder import FirstOrderInvalidError, SmoothFamily, solve_first_order
from .preferences import RiskFunctional, risk_from_dict, utility_from_dict
from .riskspace import check_kernel_monotone
from .scenarios import ScenarioFileError, load_scenario
from .solvers import (
    ContractGrid,
    DesignResult,
    InfeasibleError,
    PreferenceDesignSpace,
    PreferenceOption,
    solve_full_info,
    solve_hidden_info,
    solve_preference_design,
)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2
MODES = ("full", "hidden", "first-order", "pref")
SWEEP_PARAMS = ("avar-alpha", "reservation", "premium", "coverage")
SWEEP_HEADER = ["param", "objective_full", "objective_hidden", "x_full", "x_hidden", "intensity_action", "intensity_profit"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(v) -> str:
    """Fixed 9-digit decimal; ``-0`` and sub-resolution noise print as zero."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if not math.isfinite(v):
        return str(v)
    if abs(v) < 5e-10:
        v = 0.0
    return f"{v:.9f}"


def _json(obj, indent=0) -> str:
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(inner + _json(v, indent + 1) for v in obj) + f"\n{pad}]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    return fmt(obj)


def parse_range(text: str) -> tuple[float, ...]:
    """``a:b:step`` inclusive of both ends."""
    try:
        a, b, step = (float(t) for t in text.split(":"))
    except ValueError:
        raise UsageError(f"range {text!r} must look like start:stop:step") from None
    if step <= 0 or b < a or not all(map(math.isfinite, (a, b, step))):
        raise UsageError(f"range {text!r} is empty or has a non-positive step")
    n = int(math.floor((b - a) / step + 1e-9))
    return tuple(round(a + k * step, 12) for k in range(n + 1))


def _grid(args, max_loss: float) -> ContractGrid:
    step = max_loss / 20 if max_loss > 0 else 1.0
    premiums = parse_range(args.premium_range or f"0:{max_loss}:{step}")
    coverages = parse_range(args.coverage_range or "0:1:0.25")
    if coverages[-1] > 1 or coverages[0] < 0:
        raise UsageError("coverage rates must lie in [0, 1]")
    return ContractGrid.linear(premiums, coverages)


def _scenario(args) -> Scenario:
    if not args.scenario:
        raise UsageError("--scenario is required for this mode")
    return load_scenario(args.scenario)


def _contract_fields(c) -> dict:
    if isinstance(c, LinearContract):
        return {"premium": c.premium, "coverage": c.coverage}
    return {"premium": c.premium, "indemnity": list(c.indemnity)}


def result_record(mode: str, name: str, r: DesignResult, intensity=None) -> dict:
    intensity = r.intensity if intensity is None else intensity
    rec = {"mode": mode, "scenario": name, "fingerprint": r.fingerprint}
    rec.update(_contract_fields(r.contract))
    rec.update(
        {
            "action_level": r.action_level,
            "objective": r.objective,
            "user_cost": r.user_cost,
            "reservation": r.reservation,
            "ir_binding": r.ir_binding,
            "ic_satisfied": r.ic_satisfied,
            "market_viable": r.market_viable,
            "tie_break": r.tie_break,
            "intensity_action": None if intensity is None else intensity.action_gap,
            "intensity_profit": None if intensity is None else intensity.profit_gap,
        }
    )
    return rec


def _render(records: list[dict], fmt_name: str) -> str:
    if fmt_name == "json":
        return _json(records[0] if len(records) == 1 else records) + "\n"
    if fmt_name == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        keys = list(records[0])
        writer.writerow(keys)
        for rec in records:
            writer.writerow([_cell(rec[k]) for k in keys])
        return buf.getvalue()
    lines = []
    for i, rec in enumerate(records):
        if i:
            lines.append("")
        width = max(len(k) for k in rec)
        lines.extend(f"{k.ljust(width)}  {_cell(rec[k])}" for k in rec)
    return "\n".join(lines) + "\n"


def _cell(v) -> str:
    if isinstance(v, list):
        return " ".join(fmt(x) for x in v)
    if isinstance(v, str):
        return v
    return fmt(v)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    target = Path(out)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=".tmp-")
    with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, target)


def load_family(path: str) -> SmoothFamily:
    """Smooth family file: exponential breach curve, linear investment cost."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    allowed = {"name", "loss", "breach", "cost", "x_range", "agent", "insurer", "reservation"}
    extra = set(data) - allowed
    if extra:
        raise UsageError(f"{path}: unknown field(s) {sorted(extra)}")
    breach, cost = data["breach"], data["cost"]
    if breach.get("kind") != "exponential" or cost.get("kind") != "linear":
        raise UsageError(f"{path}: supported curves are breach=exponential, cost=linear")
    scale, rate, unit = float(breach["scale"]), float(breach["rate"]), float(cost["rate"])
    lo, hi = (float(v) for v in data["x_range"])
    agent = risk_from_dict(data["agent"]["risk"]) if "agent" in data else RiskFunctional.expectation()
    insurer = utility_from_dict(data["insurer"]["utility"]) if "insurer" in data else None
    kwargs = {"insurer": insurer} if insurer is not None else {}
    return SmoothFamily(
        loss=float(data["loss"]),
        breach_prob=lambda x: scale * math.exp(-rate * x),
        cost=lambda x: unit * x,
        x_lo=lo,
        x_hi=hi,
        agent=agent,
        breach_prob_slope=lambda x: -rate * scale * math.exp(-rate * x),
        cost_slope=lambda x: unit,
        reservation=data.get("reservation"),
        name=str(data.get("name", Path(path).stem)),
        **kwargs,
    )


def load_preferences(path: str) -> PreferenceDesignSpace:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    options = []
    for i, item in enumerate(data):
        extra = set(item) - {"label", "risk", "cost", "status_quo"}
        if extra:
            raise UsageError(f"{path}: option {i}: unknown field(s) {sorted(extra)}")
        options.append(
            PreferenceOption(
                str(item["label"]),
                risk_from_dict(item["risk"]),
                float(item.get("cost", 0.0)),
                bool(item.get("status_quo", False)),
            )
        )
    return PreferenceDesignSpace(tuple(options))


def cmd_validate(args) -> int:
    try:
        s = load_scenario(args.file)
    except (ScenarioFileError, OSError, ValueError) as exc:
        print(f"invalid: {exc}")
        return EXIT_USAGE
    print(f"scenario: {s.name} ({len(s.space)} outcomes, {len(s.actions)} actions)")
    res = s.reservation
    print(f"reservation: {fmt(res.value)}" + (" (derived)" if res.derived else ""))
    report = check_kernel_monotone(s.kernel)
    if report.ok:
        print("kernel: FOSD-monotone")
    else:
        print(f"warning: kernel not FOSD-monotone: {report}")
    return EXIT_OK


def cmd_design(args) -> int:
    mode = args.mode.removeprefix("design-")
    if mode not in MODES:
        raise UsageError(f"--mode must be one of {MODES}")
    if mode == "first-order":
        if not args.family:
            raise UsageError("--family is required for first-order mode")
        family = load_family(args.family)
        grid = _grid(args, family.loss)
        r = solve_first_order(family, grid)
        records = [result_record(mode, family.name, r)]
    elif mode == "pref":
        if not args.prefs:
            raise UsageError("--prefs is required for pref mode")
        s = _scenario(args)
        grid = _grid(args, max(s.space.losses))
        design = solve_preference_design(s, grid, load_preferences(args.prefs), args.tie_break)
        records = []
        for row in design.rows:
            h, f, mh = row.hidden, row.full, row.intensity
            records.append(
                {
                    "label": row.option.label,
                    "risk": row.option.risk.describe(),
                    "shaping_cost": row.option.cost,
                    "objective_hidden": None if h is None else h.objective,
                    "objective_full": None if f is None else f.objective,
                    "intensity_action": None if mh is None else mh.action_gap,
                    "intensity_profit": None if mh is None else mh.profit_gap,
                    "net_value": row.net_value,
                    "market_viable": False if h is None else h.market_viable,
                    "selected": row is design.best,
                }
            )
    else:
        s = _scenario(args)
        grid = _grid(args, max(s.space.losses))
        if mode == "full":
            r = solve_full_info(s, grid, args.tie_break)
            records = [result_record(mode, s.name, r)]
        else:
            r = solve_hidden_info(s, grid, args.tie_break)
            try:
                fb_intensity = solve_full_info(s, grid, args.tie_break).intensity
            except InfeasibleError:
                fb_intensity = None
            records = [result_record(mode, s.name, r, fb_intensity)]
    _emit(_render(records, args.format), args.out)
    return EXIT_OK


def _linspace(a: float, b: float, n: int) -> list[float]:
    if n == 1:
        return [a]
    return [a + (b - a) * k / (n - 1) for k in range(n)]


def cmd_sweep(args) -> int:
    if args.param not in SWEEP_PARAMS:
        raise UsageError(f"--param must be one of {SWEEP_PARAMS}")
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    s = _scenario(args)
    if args.param == "avar-alpha" and s.agent.risk.kind != "avar":
        raise UsageError(f"avar-alpha sweep needs an AV@R agent, scenario has {s.agent.risk.describe()}")
    base_grid = _grid(args, max(s.space.losses))
    rows = [SWEEP_HEADER]
    for value in _linspace(args.start, args.stop, args.steps):
        scen, grid = s, base_grid
        if args.param == "avar-alpha":
            scen = s.with_agent(risk=RiskFunctional.avar(value))
        elif args.param == "reservation":
            scen = s.with_agent(reservation=value)
        elif args.param == "premium":
            grid = ContractGrid.linear([value], base_grid.coverages)
        else:
            grid = ContractGrid.linear(base_grid.premiums, [value])
        try:
            full = solve_full_info(scen, grid, args.tie_break)
        except InfeasibleError:
            full = None
        try:
            hidden = solve_hidden_info(scen, grid, args.tie_break)
        except InfeasibleError:
            hidden = None
        mh = None if full is None else full.intensity
        rows.append(
            [
                fmt(value),
                fmt(None if full is None else full.objective),
                fmt(None if hidden is None else hidden.objective),
                fmt(None if full is None else full.action_level),
                fmt(None if hidden is None else hidden.action_level),
                fmt(None if mh is None else mh.action_gap),
                fmt(None if mh is None else mh.profit_gap),
            ]
        )
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def _add_design_options(p):
    p.add_argument("--scenario", help="scenario JSON file")
    p.add_argument("--premium-range", help="start:stop:step (default 0:max-loss:max-loss/20)")
    p.add_argument("--coverage-range", help="start:stop:step (default 0:1:0.25)")
    p.add_argument("--tie-break", default="insurer", choices=["low", "insurer", "pessimistic"])
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cyberinsure", description="Cyber-insurance contract design over finite scenarios")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a scenario file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("design", help="solve one design problem")
    p.add_argument("--mode", required=True, help="full | hidden | first-order | pref")
    p.add_argument("--family", help="smooth family JSON (first-order mode)")
    p.add_argument("--prefs", help="preference options JSON (pref mode)")
    p.add_argument("--format", default="table", choices=["table", "json", "csv"])
    _add_design_options(p)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("sweep", help="re-solve over a parameter range, CSV output")
    p.add_argument("--param", required=True, help="|".join(SWEEP_PARAMS))
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    _add_design_options(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (UsageError, ScenarioFileError, FirstOrderInvalidError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
