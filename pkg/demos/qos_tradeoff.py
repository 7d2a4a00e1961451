"""Energy efficiency against the required network sum SE.

Mean over a handful of desk-scale layouts.  The curve is flat while the
floor is slack, bends down once it binds, and drops to zero where even
full power with every link on cannot reach the target.
"""

import dataclasses

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dmimo_ee import ConfigBundle
from dmimo_ee.experiments import run_sweep


def main():
    bundle = ConfigBundle()
    geo = dataclasses.replace(bundle.geometry, num_aps=20, num_ues=10)
    exp = dataclasses.replace(
        bundle.experiment,
        realizations=5,
        qos_grid=(0.0, 4.0, 8.0, 10.0, 12.0, 14.0, 16.0, 40.0),
    )
    bundle = dataclasses.replace(bundle, geometry=geo, experiment=exp)
    res = run_sweep(bundle, "demo_qos_sweep")

    qos = [row[0] for row in res.aggregate_rows]
    mean_ee = [row[5] / 1e6 for row in res.aggregate_rows]
    feas = []
    n = bundle.experiment.realizations
    for i in range(0, len(res.rows), n):
        feas.append(sum(1 for r in res.rows[i : i + n] if r[9] != "infeasible") / n)

    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(qos, mean_ee, "o-", label="mean EE")
    ax.set_xlabel("required sum SE (bit/s/Hz)")
    ax.set_ylabel("mean EE (Mbit/joule)")
    ax.grid(alpha=0.3)
    ax2 = ax.twinx()
    ax2.plot(qos, feas, "s--", color="tab:gray", alpha=0.7, label="feasible fraction")
    ax2.set_ylabel("feasible fraction")
    ax2.set_ylim(-0.05, 1.05)
    fig.legend(loc="lower left", bbox_to_anchor=(0.12, 0.14))
    ax.set_title(f"EE against the SE floor, {n} layouts at M=20, T=10")
    fig.tight_layout()
    fig.savefig("demo_qos_tradeoff.png", dpi=140)
    print("wrote demo_qos_tradeoff.png")
    print("mean EE by floor:", {q: round(float(m), 3) for q, m in zip(qos, mean_ee)})


if __name__ == "__main__":
    main()
