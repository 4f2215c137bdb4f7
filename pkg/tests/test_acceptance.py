"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line (collected again in the
terminal summary).  Run on its own with ``pytest tests/test_acceptance.py -s``
or ``python3 tests/test_acceptance.py``.
"""

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, CONFIGS, grid_scenarios  # noqa: E402

from cogrelay import cli  # noqa: E402
from cogrelay.closed_form import secondary_outage_mrc  # noqa: E402
from cogrelay.mc_sim import (  # noqa: E402
    McConfig,
    SinrModel,
    estimate_primary_outage,
    estimate_secondary_outage,
)
from cogrelay.quad_oracle import Mode, outage_by_quadrature  # noqa: E402
from cogrelay.scenario import Binding, db_to_linear, reference_scenario, power_budget  # noqa: E402
from cogrelay.specfun import exp_integral_e1, exp_integral_en, upper_gamma_nonpos  # noqa: E402

MC_SEED = 42


def report(name, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def representative_scenarios():
    return [
        reference_scenario(n_relays=n, p_pt=db_to_linear(p_db), lambda_p=lam)
        for n in (1, 2, 3)
        for p_db, lam in ((5, 0.2), (15, 0.1), (25, 0.05))
    ]


def power_curve(sweep_name, curve="mrc_with_direct"):
    spec = cli.parse_sweep((CONFIGS / sweep_name).read_text())
    values = []
    for v in spec.grid:
        res = secondary_outage_mrc(spec.scenario_at(v))
        values.append(res.outage_mrc if curve == "mrc_with_direct" else res.outage_relay_only)
    return spec, np.array(values)


def test_1_specfun_conformance():
    start = time.perf_counter()
    xs = np.geomspace(1e-3, 200.0, 30)
    worst, points, bound_ok, mono_ok = 0.0, 0, True, True
    for a in range(-7, 1):
        for x in xs:
            x = float(x)
            points += 1
            upper = upper_gamma_nonpos(a + 1, x) if a < 0 else math.exp(-x)
            rhs = a * upper_gamma_nonpos(a, x) + x**a * math.exp(-x)
            worst = max(worst, abs(upper - rhs) / abs(upper))
            n = 1 - a
            bridge = x ** (1 - n) * exp_integral_en(n, x)
            worst = max(worst, abs(upper_gamma_nonpos(a, x) - bridge) / bridge)
            e_n = exp_integral_en(n, x)
            # exp(-x)/(x + n) < E_n(x) <= exp(-x)/(x + n - 1)
            bound_ok &= math.exp(-x) / (x + n) < e_n <= math.exp(-x) / (x + n - 1) * (1 + 1e-12)
        seq = [exp_integral_en(1 - a, float(x)) for x in xs]
        mono_ok &= all(b < a_ for a_, b in zip(seq, seq[1:]))
    e1 = [exp_integral_e1(float(x)) for x in xs]
    mono_ok &= all(b < a_ for a_, b in zip(e1, e1[1:]))
    elapsed = time.perf_counter() - start
    ok = points >= 200 and worst <= 1e-9 and bound_ok and mono_ok and elapsed < 1.0
    report("1 specfun conformance", ok,
           f"{points} (a, x) points, worst identity rel.err {worst:.2e} (tol 1e-9), "
           f"bounds {bound_ok}, monotone {mono_ok}, {elapsed:.2f}s (< 1s)")


def test_2_oracle_equivalence():
    start = time.perf_counter()
    worst_mrc = worst_relay = 0.0
    grid = grid_scenarios()
    for params in grid:
        res = secondary_outage_mrc(params)
        q_mrc = outage_by_quadrature(params, Mode.MRC_WITH_DIRECT)
        q_relay = outage_by_quadrature(params, Mode.RELAY_ONLY)
        worst_mrc = max(worst_mrc, abs(res.outage_mrc - q_mrc) / q_mrc)
        worst_relay = max(worst_relay, abs(res.i1 - q_relay) / q_relay)
    elapsed = time.perf_counter() - start
    ok = len(grid) == 45 and worst_mrc <= 1e-6 and worst_relay <= 1e-8 and elapsed < 60
    report("2 oracle equivalence", ok,
           f"{len(grid)} scenarios, worst MRC rel.err {worst_mrc:.2e} (tol 1e-6), "
           f"worst relay-only {worst_relay:.2e} (tol 1e-8), {elapsed:.1f}s (< 60s)")


def test_3_simulation_agreement():
    start = time.perf_counter()
    worst, misses = 0.0, []
    for params in representative_scenarios():
        closed = secondary_outage_mrc(params).outage_mrc
        est = estimate_secondary_outage(params, McConfig(samples=1_000_000, seed=MC_SEED, workers=4))
        z = abs(closed - est.p_hat) / est.std_error
        worst = max(worst, z)
        if z > 3:
            misses.append((params.n_relays, params.p_pt, params.lambda_p, z))
    elapsed = time.perf_counter() - start
    ok = not misses and elapsed < 120
    report("3 simulation agreement", ok,
           f"9 scenarios x 1e6 samples (seed {MC_SEED}), worst |closed - mc|/SE {worst:.2f} (<= 3), "
           f"misses {misses}, {elapsed:.1f}s (< 120s)")


def test_4_exact_vs_bound():
    worst, failures = math.inf, []
    for params in representative_scenarios():
        bound = estimate_secondary_outage(params, McConfig(samples=1_000_000, seed=MC_SEED, workers=4))
        exact = estimate_secondary_outage(
            params, McConfig(samples=1_000_000, seed=MC_SEED, workers=4, sinr_model=SinrModel.EXACT_HARMONIC)
        )
        slack = 3 * math.hypot(bound.std_error, exact.std_error)
        margin = exact.p_hat - (bound.p_hat - slack)
        worst = min(worst, margin)
        if margin < 0:
            failures.append((params.n_relays, params.p_pt, params.lambda_p))
    pointwise = True
    for params in representative_scenarios():
        try:
            estimate_secondary_outage(params, McConfig(samples=100_000, seed=MC_SEED, check_bound=True))
        except AssertionError:
            pointwise = False
    report("4 exact vs bound", not failures and pointwise,
           f"exact >= bound - 3 SE on 9 scenarios (min margin {worst:.2e}), "
           f"pointwise ordering on 1e5 checked samples per scenario: {pointwise}")


def _single_interior_minimum(values):
    k = int(np.argmin(values))
    descending = all(b <= a for a, b in zip(values[: k + 1], values[1 : k + 1]))
    ascending = all(b >= a for a, b in zip(values[k:], values[k + 1 :]))
    return 0 < k < len(values) - 1 and descending and ascending and values[-1] > values[k]


def test_5a_non_monotone():
    start = time.perf_counter()
    spec1, n1 = power_curve("power_sweep_n1.sweep")
    _, n2 = power_curve("power_sweep_n2.sweep")
    elapsed = time.perf_counter() - start
    ok = _single_interior_minimum(n1) and _single_interior_minimum(n2) and elapsed < 60
    report("5a power sweep: non-monotone MRC outage", ok,
           f"minimum at P_PT = {spec1.grid[int(np.argmin(n1))]:g} dB (N=1, {n1.min():.4g}) and "
           f"{spec1.grid[int(np.argmin(n2))]:g} dB (N=2, {n2.min():.4g}), {elapsed:.2f}s (< 60s)")


def test_5b_relay_count_ordering():
    spec, n1 = power_curve("power_sweep_n1.sweep")
    _, n2 = power_curve("power_sweep_n2.sweep")
    bad = [g for g, a, b in zip(spec.grid, n1, n2) if not b < a]
    report("5b power sweep: outage(N=2) < outage(N=1) at every point", not bad,
           f"violated at P_PT = {bad} dB" if bad else "all 16 grid points strict")


def test_5c_direct_link_helps():
    spec = None
    bad = []
    for name in ("power_sweep_n1.sweep", "power_sweep_n2.sweep"):
        spec, mrc = power_curve(name)
        _, relay = power_curve(name, "relay_only")
        bad += [(name, g) for g, m, r in zip(spec.grid, mrc, relay) if not r > m]
    report("5c power sweep: relay-only above MRC at every point", not bad,
           f"violated at {bad}" if bad else "all 32 grid points strict")


def _lambda_sweep(name):
    spec = cli.parse_sweep((CONFIGS / name).read_text())
    values, onset = [], None
    for v in spec.grid:
        params = spec.scenario_at(v)
        budget = power_budget(params)
        values.append(secondary_outage_mrc(params).outage_mrc)
        if onset is None and budget.st_binding is Binding.PEAK and budget.sr_binding is Binding.PEAK:
            onset = v
    return np.array(spec.grid), np.array(values), onset


def test_6_lambda_floor():
    start = time.perf_counter()
    details, ok = [], True
    onsets = {}
    for name, pk in (("lambda_sweep_pk10.sweep", 10), ("lambda_sweep_pk15.sweep", 15)):
        grid, values, onset = _lambda_sweep(name)
        non_increasing = bool(np.all(np.diff(values) <= 0))
        floor = values[grid >= onset] if onset is not None else np.array([])
        spread = float(floor.max() - floor.min()) if floor.size else math.inf
        ok &= non_increasing and spread <= 1e-12
        onsets[pk] = onset
        details.append(f"P_pk={pk} dB: non-increasing {non_increasing}, onset lambda_p={onset}, "
                       f"floor {floor[0] if floor.size else float('nan'):.6g} spread {spread:.1e}")
    ok &= onsets[10] is not None and onsets[15] is not None and onsets[15] > onsets[10]
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    report("6 lambda sweep floor", ok, "; ".join(details) + f"; {elapsed:.2f}s (< 60s)")


def test_7_primary_round_trip():
    binding = reference_scenario(p_pk=db_to_linear(30.0))
    peak = reference_scenario()
    b_budget, p_budget = power_budget(binding), power_budget(peak)
    mc = McConfig(samples=1_000_000, seed=MC_SEED)
    est_b = estimate_primary_outage(binding, b_budget.p_st, binding.omega_st_pd, mc)
    est_p = estimate_primary_outage(peak, p_budget.p_st, peak.omega_st_pd, mc)
    ok = (
        b_budget.st_binding is Binding.PRIMARY_OUTAGE
        and abs(est_b.p_hat - binding.lambda_p) <= 3 * est_b.std_error
        and p_budget.st_binding is Binding.PEAK
        and est_p.p_hat <= peak.lambda_p + 3 * est_p.std_error
    )
    report("7 primary QoS round trip", ok,
           f"P_pk=30 dB (primary-binding): p_hat {est_b.p_hat:.5f} vs lambda_p 0.1, "
           f"|diff|/SE {abs(est_b.p_hat - 0.1) / est_b.std_error:.2f}; "
           f"P_pk=15 dB (peak-binding): p_hat {est_p.p_hat:.5f} <= 0.1 + 3 SE")


def test_8_determinism(tmp_path):
    outputs = []
    for i, workers in enumerate((1, 1, 4)):
        out = tmp_path / f"run{i}.csv"
        code = cli.cmd_sweep(str(CONFIGS / "power_sweep_n2.sweep"), str(out), workers=workers)
        assert code == 0
        outputs.append(out.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    rows = outputs[0].count(b"\n") - 1
    report("8 determinism", ok,
           f"power_sweep_n2 (all engines, {rows} rows) byte-identical "
           f"across two runs and workers {{1, 4}}: {ok}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
