"""Closed form vs quadrature (and optionally Monte Carlo) over the 45-point grid."""

import argparse
import time

from cogrelay.closed_form import secondary_outage_mrc
from cogrelay.mc_sim import McConfig, estimate_secondary_outage
from cogrelay.quad_oracle import Mode, outage_by_quadrature
from cogrelay.scenario import db_to_linear, reference_scenario


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--mc-samples", type=int, default=0, help="also run Monte Carlo (0 = skip)")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--workers", type=int, default=4)
    args = parser.parse_args()

    start = time.perf_counter()
    worst_mrc = worst_relay = worst_z = 0.0
    print(f"{'N':>2} {'P_PT':>5} {'lam':>5} {'closed MRC':>13} {'rel.err':>9} {'relay rel.err':>13}"
          + ("   |c-mc|/SE" if args.mc_samples else ""))
    for n in (1, 2, 3):
        for p_db in (5, 10, 15, 20, 25):
            for lam in (0.05, 0.1, 0.2):
                params = reference_scenario(n_relays=n, p_pt=db_to_linear(p_db), lambda_p=lam)
                res = secondary_outage_mrc(params)
                q = outage_by_quadrature(params, Mode.MRC_WITH_DIRECT)
                q1 = outage_by_quadrature(params, Mode.RELAY_ONLY)
                e_mrc = abs(res.outage_mrc - q) / q
                e_relay = abs(res.i1 - q1) / q1
                worst_mrc, worst_relay = max(worst_mrc, e_mrc), max(worst_relay, e_relay)
                line = f"{n:2d} {p_db:5d} {lam:5.2f} {res.outage_mrc:13.6e} {e_mrc:9.1e} {e_relay:13.1e}"
                if args.mc_samples:
                    est = estimate_secondary_outage(
                        params, McConfig(samples=args.mc_samples, seed=args.seed, workers=args.workers)
                    )
                    z = abs(res.outage_mrc - est.p_hat) / est.std_error if est.std_error else 0.0
                    worst_z = max(worst_z, z)
                    line += f"   {z:10.2f}"
                print(line)
    print(f"worst MRC rel.err {worst_mrc:.2e}, worst relay-only rel.err {worst_relay:.2e}"
          + (f", worst |closed - mc|/SE {worst_z:.2f}" if args.mc_samples else "")
          + f", {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
