"""One desk-scale solve, iteration by iteration.

Top: the surrogate objective after each alternating step.  Bottom: the
model energy efficiency and the association fractionality, which melts
to zero as the relaxation settles on a near-binary serving pattern.
"""

import dataclasses

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from dmimo_ee import ConfigBundle
from dmimo_ee.experiments import build_problem, layout_seed_for
from dmimo_ee.optimizer import optimize


def main():
    bundle = ConfigBundle()
    geo = dataclasses.replace(bundle.geometry, num_aps=20, num_ues=10)
    bundle = dataclasses.replace(bundle, geometry=geo)
    seed = layout_seed_for(0, 20, 10, 0)
    ps, eta0, d0 = build_problem(bundle, seed)
    sol, trace = optimize(ps, eta0, d0, bundle.solver)

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 7), sharex=True)
    ax1.plot(trace.iteration, trace.objective, "o-", label="after association step")
    ax1.plot(trace.iteration, trace.objective_power_step, "s--", label="after power step")
    ax1.set_ylabel("surrogate objective")
    ax1.legend()
    ax1.grid(alpha=0.3)

    ax2.plot(trace.iteration, [e / 1e6 for e in trace.full_ee], "o-", color="tab:green")
    ax2.set_ylabel("model EE (Mbit/joule)", color="tab:green")
    ax2.grid(alpha=0.3)
    ax3 = ax2.twinx()
    ax3.plot(trace.iteration, trace.fractionality, "d:", color="tab:red")
    ax3.set_ylabel("association fractionality", color="tab:red")
    ax2.set_xlabel("outer iteration")

    fig.suptitle(f"status={sol.status} after {sol.iterations} iterations, final EE {sol.ee/1e6:.2f} Mbit/J")
    fig.tight_layout()
    fig.savefig("demo_convergence.png", dpi=140)
    print("wrote demo_convergence.png")
    print(f"final links per UE: {sol.assoc.sum(axis=0)}")


if __name__ == "__main__":
    main()
