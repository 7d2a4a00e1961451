import numpy as np
import pytest

from dmimo_ee import energy as energy_mod
from dmimo_ee import geometry, se_model
from dmimo_ee.optimizer import ProblemSpec


def build_ps(
    seed=0,
    num_aps=6,
    num_ues=4,
    antennas=8,
    pilot_len=5,
    coherence_len=200,
    p_u=0.1,
    p_p=0.1,
    se_qos=0.0,
    strong_fraction=0.95,
    lsfd_mode="uniform",
    side_m=500.0,
    energy=None,
):
    """Random network instance wired into a ProblemSpec, for solver tests."""
    cfg = geometry.GeometryConfig(
        side_m=side_m,
        num_aps=num_aps,
        num_ues=num_ues,
        antennas_per_ap=antennas,
        pilot_len=pilot_len,
        coherence_len=coherence_len,
        rng_seed=seed,
    )
    dep = geometry.place_network(cfg)
    beta = geometry.compute_lsfc(dep, cfg)
    pilots = geometry.assign_pilots(num_ues, pilot_len, seed=seed)
    consts = energy or energy_mod.EnergyConstants()
    noise = se_model.thermal_noise_w(consts.bandwidth_hz)
    gamma = se_model.estimation_quality(beta, pilots, p_p, noise)
    full = np.ones_like(beta)
    grouping = se_model.classify_users(beta, full, pilots, strong_fraction, antennas)
    weights = se_model.lsfd_weights(gamma, grouping, full, lsfd_mode)
    return ProblemSpec(
        beta=beta,
        gamma=gamma,
        pilots=pilots,
        grouping=grouping,
        weights=weights,
        energy=consts,
        antennas_per_ap=antennas,
        p_u=p_u,
        p_p=p_p,
        noise_w=noise,
        prelog=se_model.prelog_factor(pilot_len, coherence_len),
        se_qos=se_qos,
        strong_fraction=strong_fraction,
        lsfd_mode=lsfd_mode,
    )


@pytest.fixture
def make_ps():
    return build_ps
