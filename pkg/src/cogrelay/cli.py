"""Command-line front end: ``eval``, ``sweep`` and ``validate``.

Exit codes: 0 success / PASS, 2 configuration error, 3 closed form outside
its validity region, 4 validation FAIL.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import mc_sim, quad_oracle
from .closed_form import OutsideValidityRegion, Validity, secondary_outage_mrc
from .mc_sim import Combine, McConfig
from .quad_oracle import Mode, QuadratureError
from .scenario import (
    SCENARIO_KEYS,
    Binding,
    ScenarioError,
    ScenarioParams,
    db_to_linear,
    parse_scenario,
    power_budget,
    read_key_values,
    scenario_from_mapping,
    thresholds,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDITY = 3
EXIT_FAIL = 4

ENGINES = ("closed_form", "monte_carlo", "quadrature")
CURVES = ("mrc_with_direct", "relay_only")
AXES = ("p_pt_db", "lambda_p", "p_pk_db", "n_relays", "r_s")
CSV_COLUMNS = (
    "axis_name", "axis_value", "curve", "engine", "outage", "ci_low", "ci_high",
    "p_st", "p_sr", "st_binding", "sr_binding", "validity",
)
SWEEP_KEYS = SCENARIO_KEYS | {"sweep_axis", "sweep_values", "engines", "curves", "mc_samples", "mc_seed"}

CLOSED_FORM_TOL = 1e-6
N_SE = 3.0


def fmt(x: float) -> str:
    return format(x, ".17g")


# --- sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    grid: tuple[float, ...]
    base: ScenarioParams
    engines: tuple[str, ...] = ("closed_form",)
    curves: tuple[str, ...] = CURVES
    mc: McConfig = field(default_factory=McConfig)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ScenarioError(f"sweep_axis must be one of {', '.join(AXES)}, got {self.axis!r}", "sweep_axis")
        if not self.grid:
            raise ScenarioError("sweep_values is empty", "sweep_values")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ScenarioError("sweep_values must be strictly increasing", "sweep_values")
        if not self.engines or any(e not in ENGINES for e in self.engines):
            raise ScenarioError(f"engines must be a non-empty subset of {ENGINES}", "engines")
        if not self.curves or any(c not in CURVES for c in self.curves):
            raise ScenarioError(f"curves must be a non-empty subset of {CURVES}", "curves")
        # canonical order keeps the CSV layout independent of how the file lists them
        object.__setattr__(self, "engines", tuple(e for e in ENGINES if e in self.engines))
        object.__setattr__(self, "curves", tuple(c for c in CURVES if c in self.curves))
        for value in self.grid:
            try:
                self.scenario_at(value)
            except ScenarioError as exc:
                raise ScenarioError(f"sweep_values: {value!r} gives an invalid scenario: {exc}", "sweep_values") from None

    def scenario_at(self, value: float) -> ScenarioParams:
        base = self.base
        if self.axis == "p_pt_db":
            return base.replace(p_pt=db_to_linear(value, base.n0))
        if self.axis == "p_pk_db":
            return base.replace(p_pk=db_to_linear(value, base.n0))
        if self.axis == "n_relays":
            if value != int(value):
                raise ScenarioError(f"n_relays grid value {value!r} is not an integer", "sweep_values")
            return base.replace(n_relays=int(value))
        return base.replace(**{self.axis: value})


def _split_list(text: str) -> tuple[str, ...]:
    return tuple(item.strip() for item in text.split(",") if item.strip())


def parse_sweep(text: str) -> SweepSpec:
    values = read_key_values(text, SWEEP_KEYS)
    for key in ("sweep_axis", "sweep_values"):
        if key not in values:
            raise ScenarioError(f"missing key {key!r}", key)
    sweep = {k: values.pop(k) for k in list(values) if k not in SCENARIO_KEYS}
    base = scenario_from_mapping(values)
    try:
        grid = tuple(float(v) for v in _split_list(sweep["sweep_values"]))
    except ValueError:
        raise ScenarioError(f"sweep_values: not a number list: {sweep['sweep_values']!r}", "sweep_values") from None
    try:
        mc = McConfig(
            samples=int(sweep.get("mc_samples", 1_000_000)),
            seed=int(sweep.get("mc_seed", 42)),
        )
    except ValueError as exc:
        raise ScenarioError(f"mc_samples/mc_seed: {exc}", "mc_samples") from None
    return SweepSpec(
        axis=sweep["sweep_axis"],
        grid=grid,
        base=base,
        engines=_split_list(sweep.get("engines", "closed_form")),
        curves=_split_list(sweep.get("curves", ",".join(CURVES))),
        mc=mc,
    )


class SweepPointError(RuntimeError):
    def __init__(self, axis: str, value: float, cause: Exception):
        super().__init__(f"sweep point {axis}={fmt(value)} failed: {cause}")
        self.cause = cause


def _point_rows(spec: SweepSpec, value: float) -> list[list[str]]:
    params = spec.scenario_at(value)
    budget = power_budget(params)
    tail = [fmt(budget.p_st), fmt(budget.p_sr), budget.st_binding.value, budget.sr_binding.value]
    closed = secondary_outage_mrc(params) if "closed_form" in spec.engines else None
    rows = []
    for curve in spec.curves:
        for engine in spec.engines:
            ci_low = ci_high = ""
            validity = ""
            if engine == "closed_form":
                outage = closed.outage_mrc if curve == "mrc_with_direct" else closed.outage_relay_only
                validity = closed.validity.value
            elif engine == "quadrature":
                outage = quad_oracle.outage_by_quadrature(params, Mode(curve))
            else:
                mc = McConfig(
                    samples=spec.mc.samples, seed=spec.mc.seed,
                    sinr_model=spec.mc.sinr_model, combine=Combine(curve),
                )
                est = mc_sim.estimate_secondary_outage(params, mc)
                outage, ci_low, ci_high = est.p_hat, fmt(est.ci_low), fmt(est.ci_high)
            rows.append([spec.axis, fmt(value), curve, engine, fmt(outage), ci_low, ci_high, *tail, validity])
    return rows


def run_sweep(spec: SweepSpec, workers: int = 1) -> str:
    """CSV text for the sweep; identical for any worker count."""

    def evaluate(value):
        try:
            return _point_rows(spec, value)
        except (OutsideValidityRegion, QuadratureError, ArithmeticError, ValueError) as exc:
            raise SweepPointError(spec.axis, value, exc) from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, spec.grid))
    else:
        results = [evaluate(v) for v in spec.grid]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rows in results:
        writer.writerows(rows)
    return buf.getvalue()


def cmd_sweep(sweep_file: str, out_path: str, workers: int = 1) -> int:
    spec = parse_sweep(Path(sweep_file).read_text(encoding="utf-8"))
    try:
        text = run_sweep(spec, workers=workers)
    except SweepPointError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDITY if isinstance(exc.cause, OutsideValidityRegion) else EXIT_FAIL
    Path(out_path).write_text(text, encoding="utf-8")
    print(f"wrote {len(spec.grid) * len(spec.curves) * len(spec.engines)} rows to {out_path}")
    return EXIT_OK


# --- eval ------------------------------------------------------------------


def cmd_eval(scenario_file: str, engines=("closed_form",), samples: int = 1_000_000,
             seed: int = 42, as_json: bool = False, out=None) -> int:
    out = out or sys.stdout
    params = parse_scenario(Path(scenario_file).read_text(encoding="utf-8"))
    budget = power_budget(params)
    th = thresholds(params)
    record: dict = {
        "p_st": budget.p_st, "p_sr": budget.p_sr,
        "st_binding": budget.st_binding.value, "sr_binding": budget.sr_binding.value,
        "theta_p": th.theta_p, "theta_s": th.theta_s,
    }
    status = EXIT_OK
    lines = [
        f"P_ST        = {fmt(budget.p_st)}  ({budget.st_binding.value})",
        f"P_SR        = {fmt(budget.p_sr)}  ({budget.sr_binding.value})",
        f"theta_p     = {fmt(th.theta_p)}",
        f"theta_s     = {fmt(th.theta_s)}",
    ]
    if "closed_form" in engines:
        try:
            res = secondary_outage_mrc(params)
        except OutsideValidityRegion as exc:
            lines.append(f"closed_form: {Validity.OUTSIDE_VALIDITY_REGION.value} ({exc})")
            record["closed_form"] = {"validity": Validity.OUTSIDE_VALIDITY_REGION.value}
            if set(engines) == {"closed_form"}:
                status = EXIT_VALIDITY
        else:
            label = " [quadrature fallback]" if res.validity is Validity.DEGENERATE_FALLBACK else ""
            lines += [
                f"closed_form validity = {res.validity.value}",
                f"closed_form I1 = {fmt(res.i1)}",
                f"closed_form I2 = {fmt(res.i2)}",
                f"closed_form I3 = {fmt(res.i3)}",
                f"closed_form outage_mrc = {fmt(res.outage_mrc)}{label}",
                f"closed_form outage_relay_only = {fmt(res.outage_relay_only)}",
            ]
            record["closed_form"] = {
                "validity": res.validity.value, "i1": res.i1, "i2": res.i2, "i3": res.i3,
                "outage_mrc": res.outage_mrc, "outage_relay_only": res.outage_relay_only,
            }
    if "quadrature" in engines:
        mrc = quad_oracle.integrate_outage(params, Mode.MRC_WITH_DIRECT)
        relay = quad_oracle.integrate_outage(params, Mode.RELAY_ONLY)
        lines += [
            f"quadrature outage_mrc = {fmt(mrc.value)}  (error <= {mrc.error:.3g})",
            f"quadrature outage_relay_only = {fmt(relay.value)}  (error <= {relay.error:.3g})",
        ]
        record["quadrature"] = {"outage_mrc": mrc.value, "outage_relay_only": relay.value}
    if "monte_carlo" in engines:
        record["monte_carlo"] = {}
        for curve in CURVES:
            est = mc_sim.estimate_secondary_outage(
                params, McConfig(samples=samples, seed=seed, combine=Combine(curve))
            )
            lines.append(
                f"monte_carlo outage_{curve} = {fmt(est.p_hat)}  "
                f"95% CI [{fmt(est.ci_low)}, {fmt(est.ci_high)}]  (n={samples}, seed={seed})"
            )
            record["monte_carlo"][curve] = {
                "p_hat": est.p_hat, "ci_low": est.ci_low, "ci_high": est.ci_high,
                "samples": samples, "seed": seed,
            }
    if as_json:
        json.dump(record, out, indent=2, sort_keys=True, allow_nan=True)
        out.write("\n")
    else:
        out.write("\n".join(lines) + "\n")
    return status


# --- validate --------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    detail: str


def _primary_check(name, params, power, binding, omega_interferer, samples, seed) -> Check:
    if binding is Binding.ZERO:
        return Check(name, power == 0.0, "secondary node silent (primary outage exceeds lambda_p on its own)")
    est = mc_sim.estimate_primary_outage(params, power, omega_interferer, McConfig(samples=samples, seed=seed))
    se = est.std_error
    if binding is Binding.PRIMARY_OUTAGE:
        ok = abs(est.p_hat - params.lambda_p) <= N_SE * se
        rule = f"|p_hat - lambda_p| <= {N_SE:g} SE"
    else:
        ok = est.p_hat <= params.lambda_p + N_SE * se
        rule = f"p_hat <= lambda_p + {N_SE:g} SE"
    return Check(name, ok, f"p_hat={est.p_hat:.6g}, lambda_p={params.lambda_p:.6g}, SE={se:.3g}; {rule} ({binding.value})")


def validate_scenario(params: ScenarioParams, samples: int = 1_000_000, seed: int = 42,
                      closed_form_fn=secondary_outage_mrc) -> list[Check]:
    """Three-engine cross-check of one scenario."""
    budget = power_budget(params)
    closed = closed_form_fn(params)
    quad = quad_oracle.outage_by_quadrature(params, Mode.MRC_WITH_DIRECT)
    est = mc_sim.estimate_secondary_outage(params, McConfig(samples=samples, seed=seed))
    c = closed.outage_mrc
    rel = abs(c - quad) / quad if quad > 0 else abs(c - quad)
    checks = [
        Check("closed_form_vs_quadrature", rel <= CLOSED_FORM_TOL,
              f"closed={fmt(c)}, quadrature={fmt(quad)}, rel.err={rel:.3g} (tol {CLOSED_FORM_TOL:g})"),
        Check("closed_form_vs_monte_carlo", abs(c - est.p_hat) <= N_SE * est.std_error,
              f"closed={fmt(c)}, mc={fmt(est.p_hat)}, SE={est.std_error:.3g}, "
              f"|diff|/SE={abs(c - est.p_hat) / est.std_error if est.std_error else math.inf:.3g}"),
        _primary_check("primary_outage_st", params, budget.p_st, budget.st_binding,
                       params.omega_st_pd, samples, seed),
        _primary_check("primary_outage_sr", params, budget.p_sr, budget.sr_binding,
                       params.omega_sr_pd, samples, seed + 1),
    ]
    if closed.validity is Validity.DEGENERATE_FALLBACK:
        checks[0].detail += " [closed form fell back to quadrature]"
    return checks


def cmd_validate(scenario_file: str, samples: int = 1_000_000, seed: int = 42, out=None,
                 closed_form_fn=secondary_outage_mrc) -> int:
    out = out or sys.stdout
    params = parse_scenario(Path(scenario_file).read_text(encoding="utf-8"))
    try:
        checks = validate_scenario(params, samples, seed, closed_form_fn)
    except OutsideValidityRegion as exc:
        out.write(f"closed form unavailable: {exc}\n")
        return EXIT_VALIDITY
    for chk in checks:
        out.write(f"{'PASS' if chk.passed else 'FAIL'}  {chk.name}: {chk.detail}\n")
    passed = all(chk.passed for chk in checks)
    out.write("PASS\n" if passed else "FAIL: " + ", ".join(c.name for c in checks if not c.passed) + "\n")
    return EXIT_OK if passed else EXIT_FAIL


# --- entry point -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cogrelay",
        description="Secondary outage of AF cognitive relays with direct link and primary interference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="evaluate one scenario")
    p_eval.add_argument("file")
    p_eval.add_argument("--engine", action="append", choices=ENGINES,
                        help="engine to run (repeatable; default closed_form)")
    p_eval.add_argument("--samples", type=int, default=1_000_000)
    p_eval.add_argument("--seed", type=int, default=42)
    p_eval.add_argument("--json", action="store_true", help="print a JSON record instead of text")

    p_sweep = sub.add_parser("sweep", help="parameter sweep to CSV")
    p_sweep.add_argument("file")
    p_sweep.add_argument("--out", required=True)
    p_sweep.add_argument("--workers", type=int, default=1)

    p_val = sub.add_parser("validate", help="three-engine validation of one scenario")
    p_val.add_argument("file")
    p_val.add_argument("--seed", type=int, default=42)
    p_val.add_argument("--samples", type=int, default=1_000_000)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "eval":
            return cmd_eval(args.file, tuple(args.engine or ("closed_form",)), args.samples, args.seed, args.json)
        if args.command == "sweep":
            return cmd_sweep(args.file, args.out, args.workers)
        return cmd_validate(args.file, args.samples, args.seed)
    except ScenarioError as exc:
        where = f" [{exc.key}]" if exc.key else ""
        print(f"config error{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
