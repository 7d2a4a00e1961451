"""Energy efficiency as AP density grows.

Two curves over the same layouts: with no SE floor the densification
gain still outruns the extra circuit power at these sizes, while a
floor of a few bit/s/Hz wipes out the sparse deployments, steepening
the left side of the curve.
"""

import dataclasses

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from dmimo_ee import ConfigBundle
from dmimo_ee.experiments import run_sweep

M_GRID = (5, 10, 20, 40)


def curve(se_qos):
    bundle = ConfigBundle()
    geo = dataclasses.replace(bundle.geometry, num_ues=10)
    exp = dataclasses.replace(
        bundle.experiment, realizations=5, se_qos=se_qos, num_aps_grid=M_GRID
    )
    bundle = dataclasses.replace(bundle, geometry=geo, experiment=exp)
    res = run_sweep(bundle, f"demo_density_sweep_q{se_qos:g}")
    return [row[5] / 1e6 for row in res.aggregate_rows]


def main():
    fig, ax = plt.subplots(figsize=(7, 5))
    for qos, style in ((0.0, "o-"), (6.0, "s--")):
        ax.plot(M_GRID, curve(qos), style, label=f"SE floor {qos:g} bit/s/Hz")
    ax.set_xlabel("number of APs")
    ax.set_ylabel("mean EE (Mbit/joule)")
    ax.set_title("densification gain at T=10, 5 layouts per point")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig("demo_ap_density.png", dpi=140)
    print("wrote demo_ap_density.png")


if __name__ == "__main__":
    main()
