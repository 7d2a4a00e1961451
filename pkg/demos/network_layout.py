"""Drop one random network and look at it.

Left: AP and UE positions on the wrapped square.  Right: large-scale
fading from every AP to one highlighted UE, distance measured around
the torus, so an AP near the opposite edge can still be loud.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from dmimo_ee import GeometryConfig, compute_lsfc, place_network, wrap_distance_matrix


def main():
    cfg = GeometryConfig(num_aps=40, num_ues=12, rng_seed=5)
    dep = place_network(cfg)
    beta = compute_lsfc(dep, cfg)
    ue = 0

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 5))
    ax1.scatter(dep.ap_xy[:, 0], dep.ap_xy[:, 1], marker="^", s=45, label="AP")
    ax1.scatter(dep.ue_xy[:, 0], dep.ue_xy[:, 1], marker="o", s=30, label="UE")
    ax1.scatter(*dep.ue_xy[ue], marker="*", s=220, color="crimson", zorder=3, label="UE 0")
    ax1.set_xlim(0, cfg.side_m)
    ax1.set_ylim(0, cfg.side_m)
    ax1.set_aspect("equal")
    ax1.set_title(f"{cfg.num_aps} APs, {cfg.num_ues} UEs on a {cfg.side_m:.0f} m torus")
    ax1.legend(loc="upper right")

    dist = wrap_distance_matrix(dep.ap_xy, dep.ue_xy, cfg.side_m)[:, ue]
    order = np.argsort(dist)
    ax2.semilogy(dist[order], beta[order, ue], "o-")
    ax2.set_xlabel("wrapped distance to UE 0 (m)")
    ax2.set_ylabel("large-scale fading coefficient")
    ax2.set_title("three-slope path loss with shadowing")
    ax2.grid(True, which="both", alpha=0.3)

    fig.tight_layout()
    fig.savefig("demo_network_layout.png", dpi=140)
    print("wrote demo_network_layout.png")
    print(f"strongest AP for UE 0: #{int(np.argmax(beta[:, ue]))} at {dist[np.argmax(beta[:, ue])]:.0f} m")


if __name__ == "__main__":
    main()
