"""Channel-estimation quality, user grouping, and the closed-form uplink SINR.

Each AP estimates its local channels from shared pilots, splits its served
UEs into a strong set (zero-forced locally) and a weak set (maximum-ratio
combined), and forwards one soft estimate per served UE.  The CPU fuses
them with fixed large-scale weights.  Everything here is expressed through
large-scale statistics only; the Monte Carlo oracle checks the weak-branch
statistics against channel-level simulation.

Transmit powers enter the SINR normalized by the noise power, so all five
terms below are dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GroupingInfeasible",
    "Grouping",
    "PowerVector",
    "SINRBreakdown",
    "thermal_noise_w",
    "estimation_quality",
    "classify_users",
    "lsfd_weights",
    "link_statistic_bases",
    "sinr_coefficient_matrices",
    "sinr_terms",
    "prelog_factor",
    "sum_se",
    "save_breakdown_csv",
]


class GroupingInfeasible(Exception):
    """An AP would zero-force at least as many pilot directions as it has antennas."""


def thermal_noise_w(bandwidth_hz: float, noise_figure_db: float = 9.0) -> float:
    """Receiver noise power in watts: -174 dBm/Hz + 10 log10(B) + noise figure."""
    noise_dbm = -174.0 + 10.0 * np.log10(bandwidth_hz) + noise_figure_db
    return float(10.0 ** ((noise_dbm - 30.0) / 10.0))


def estimation_quality(
    beta: np.ndarray,
    pilots,
    pilot_power_w: float,
    noise_w: float,
) -> np.ndarray:
    """Per-antenna mean square of the channel estimate, shape like beta.

    gamma[m, t] = L_p p_p beta[m, t]^2 / (L_p p_p sum_{t' sharing t's pilot}
    beta[m, t'] + sigma^2).  The sharer sum includes t itself, so
    gamma <= beta always, with equality only in the noiseless
    contamination-free limit.
    """
    beta = np.asarray(beta, dtype=float)
    lp = pilots.pilot_len
    onehot = np.zeros((beta.shape[1], lp))
    onehot[np.arange(beta.shape[1]), pilots.pilot_of] = 1.0
    # (num_aps, pilot_len): received pilot energy per slot, then gather per UE
    slot_sum = beta @ onehot
    sharer_sum = slot_sum[:, pilots.pilot_of]
    return lp * pilot_power_w * beta**2 / (lp * pilot_power_w * sharer_sum + noise_w)


# ---------------------------------------------------------------------------
# Strong / weak grouping


@dataclass(frozen=True)
class Grouping:
    """Partition of each AP's served UEs into zero-forced and maximum-ratio sets.

    strong[m, t] is True when AP m zero-forces UE t; weak[m, t] when it
    treats t with maximum-ratio combining.  zf_pilot_count[m] is the number
    of distinct pilots spanned by AP m's strong set, i.e. the dimension of
    its zero-forcing projection.
    """

    strong: np.ndarray  # (M, T) bool
    weak: np.ndarray  # (M, T) bool
    zf_pilot_count: np.ndarray  # (M,) int

    @property
    def served(self) -> np.ndarray:
        return self.strong | self.weak


def classify_users(
    beta: np.ndarray,
    assoc: np.ndarray,
    pilots,
    strong_fraction: float,
    antennas_per_ap: int,
    pilot_len: int | None = None,
) -> Grouping:
    """Split served UEs into strong and weak sets per AP.

    A served UE is strong at AP m when beta[m, t] is at least
    `strong_fraction` of the UE's best coefficient over all APs.  Each AP
    then demotes its lowest-beta strong UEs until the distinct pilots in
    its strong set number at most min(pilot_len, antennas_per_ap - 1),
    which keeps the zero-forcing projection short of the antenna count.
    At strong_fraction >= 1 only the single best AP (lowest index on ties)
    can classify a UE as strong.
    """
    beta = np.asarray(beta, dtype=float)
    served = np.asarray(assoc) != 0
    if pilot_len is None:
        pilot_len = pilots.pilot_len
    best = beta.max(axis=0)
    if strong_fraction >= 1.0:
        strong = np.zeros_like(served)
        strong[beta.argmax(axis=0), np.arange(beta.shape[1])] = True
        strong &= served & (best > 0)
        if strong_fraction > 1.0:
            strong[:] = False
    else:
        with np.errstate(invalid="ignore"):
            strong = served & (beta >= strong_fraction * best[None, :]) & (best > 0)
    cap = min(pilot_len, antennas_per_ap - 1)
    zf_count = np.zeros(beta.shape[0], dtype=int)
    for m in range(beta.shape[0]):
        members = np.flatnonzero(strong[m])
        while len(np.unique(pilots.pilot_of[members])) > cap:
            weakest = members[np.argmin(beta[m, members])]
            strong[m, weakest] = False
            members = np.flatnonzero(strong[m])
        zf_count[m] = len(np.unique(pilots.pilot_of[members]))
    return Grouping(strong=strong, weak=served & ~strong, zf_pilot_count=zf_count)


def lsfd_weights(gamma: np.ndarray, grouping: Grouping, assoc: np.ndarray, mode: str = "uniform") -> np.ndarray:
    """Large-scale fusion weights, zero on non-served links.

    uniform copies the association; matched weighs each serving AP by its
    estimation quality, normalized to a unit maximum per UE.
    """
    assoc = np.asarray(assoc, dtype=float)
    if mode == "uniform":
        return assoc.copy()
    if mode == "matched":
        a = assoc * np.asarray(gamma, dtype=float)
        peak = a.max(axis=0, keepdims=True)
        return np.where(peak > 0, a / np.where(peak > 0, peak, 1.0), 0.0)
    raise ValueError(f"unknown weight mode: {mode!r}")


# ---------------------------------------------------------------------------
# Closed-form SINR


@dataclass(frozen=True)
class PowerVector:
    """Per-UE transmit power fractions plus the power ceilings in watts."""

    eta: np.ndarray  # (T,) in [0, 1]
    p_u: float  # max uplink data power, watts
    p_p: float  # pilot power, watts

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=float)
        object.__setattr__(self, "eta", eta)
        if np.any(eta < -1e-12) or np.any(eta > 1 + 1e-12):
            raise ValueError("eta entries must lie in [0, 1]")
        if self.p_u <= 0 or self.p_p <= 0:
            raise ValueError("powers must be positive")


@dataclass(frozen=True)
class SINRBreakdown:
    """Per-UE SINR with its additive components (noise-normalized units)."""

    desired: np.ndarray
    pilot_contamination: np.ndarray
    beamforming_uncertainty: np.ndarray
    noncoherent_interference: np.ndarray
    noise: np.ndarray
    interference: np.ndarray  # pc + bu + ni + noise
    sinr: np.ndarray


def _zf_denominators(grouping: Grouping, antennas_per_ap: int) -> np.ndarray:
    """Per-AP antenna surplus A - L_Sm; must stay positive wherever zero-forcing happens."""
    denom = antennas_per_ap - grouping.zf_pilot_count
    bad = (denom <= 0) & grouping.strong.any(axis=1)
    if np.any(bad):
        raise GroupingInfeasible(
            f"APs {np.flatnonzero(bad).tolist()} zero-force as many pilots as antennas"
        )
    return np.where(denom > 0, denom, 1).astype(float)


def link_statistic_bases(
    weights: np.ndarray,
    beta: np.ndarray,
    gamma: np.ndarray,
    grouping: Grouping,
    antennas_per_ap: int,
):
    """Per-link arrays the SINR terms are built from, before association enters.

    Returns (amp, amp_over_beta, zf_quad, mr_quad), all (M, T):
    amp multiplies d linearly in the coherent sums, amp_over_beta carries
    the contamination beta ratio, and the two quad arrays multiply d^2 in
    the zero-forcing and maximum-ratio branches of the quadratic terms.
    """
    a = np.asarray(weights, dtype=float)
    strong = grouping.strong
    weak = grouping.weak
    denom = _zf_denominators(grouping, antennas_per_ap)
    branch = strong * 1.0 + weak * float(antennas_per_ap)
    amp = a * gamma * branch
    with np.errstate(divide="ignore", invalid="ignore"):
        amp_over_beta = np.where(beta > 0, amp / np.where(beta > 0, beta, 1.0), 0.0)
    zf_quad = a**2 * gamma * strong / denom[:, None]
    mr_quad = a**2 * gamma * weak * float(antennas_per_ap)
    return amp, amp_over_beta, zf_quad, mr_quad


def sinr_coefficient_matrices(
    assoc: np.ndarray,
    weights: np.ndarray,
    beta: np.ndarray,
    gamma: np.ndarray,
    grouping: Grouping,
    pilots,
    antennas_per_ap: int,
):
    """SINR as a function of the power fractions, for a fixed association.

    Returns (ds_amp, k_pc, k_other, n0) with, in noise-normalized units,
    DS_t  = rho eta_t ds_amp_t^2,
    I_t   = rho (k_pc + k_other) @ eta + n0_t,
    where k_pc carries the coherent pilot-contamination quadratic, the
    diagonal of k_other the own-signal beamforming uncertainty, its
    off-diagonal the non-coherent interference, and n0 the combined noise.
    The association may be fractional: it scales coherent sums linearly
    and quadratic terms by its square.
    """
    d = np.asarray(assoc, dtype=float)
    amp, amp_over_beta, zf_quad, mr_quad = link_statistic_bases(
        weights, beta, gamma, grouping, antennas_per_ap
    )
    ds_amp = (d * amp).sum(axis=0)
    pc_dot = (d * amp_over_beta).T @ beta  # (T, T): coherent cross amplitude
    sharer_offdiag = pilots.sharer_mask() & ~np.eye(beta.shape[1], dtype=bool)
    k_pc = np.where(sharer_offdiag, pc_dot**2, 0.0)
    d2 = d**2
    k_other = (d2 * zf_quad).T @ (beta - gamma) + (d2 * mr_quad).T @ beta
    n0 = (d2 * (zf_quad + mr_quad)).sum(axis=0)
    return ds_amp, k_pc, k_other, n0


def sinr_terms(
    pv: PowerVector,
    assoc: np.ndarray,
    weights: np.ndarray,
    beta: np.ndarray,
    gamma: np.ndarray,
    grouping: Grouping,
    pilots,
    antennas_per_ap: int,
    noise_w: float,
) -> SINRBreakdown:
    """Closed-form effective SINR of every UE after fusion.

    The data power enters as p_u / noise_w, so desired signal, pilot
    contamination, beamforming uncertainty and non-coherent interference
    scale with the normalized SNR while the noise term does not.  UEs with
    no usable links get SINR 0.
    """
    rho = pv.p_u / noise_w
    eta = pv.eta
    ds_amp, k_pc, k_other, n0 = sinr_coefficient_matrices(
        assoc, weights, beta, gamma, grouping, pilots, antennas_per_ap
    )
    desired = rho * eta * ds_amp**2
    pc = rho * (k_pc @ eta)
    bu = rho * eta * np.diag(k_other)
    off = k_other - np.diag(np.diag(k_other))
    ni = rho * (off @ eta)
    interference = pc + bu + ni + n0
    with np.errstate(invalid="ignore", divide="ignore"):
        sinr = np.where(interference > 0, desired / np.where(interference > 0, interference, 1.0), 0.0)
    return SINRBreakdown(
        desired=desired,
        pilot_contamination=pc,
        beamforming_uncertainty=bu,
        noncoherent_interference=ni,
        noise=n0,
        interference=interference,
        sinr=sinr,
    )


def prelog_factor(pilot_len: int, coherence_len: int) -> float:
    """Fraction of the coherence block left for uplink data: (1 - L_p/L_c) / 2."""
    return (1.0 - pilot_len / coherence_len) / 2.0


def sum_se(breakdown: SINRBreakdown, prelog: float):
    """Per-UE and total spectral efficiency in bit/s/Hz."""
    se = prelog * np.log2(1.0 + breakdown.sinr)
    return se, float(se.sum())


def save_breakdown_csv(path, breakdown: SINRBreakdown) -> None:
    """Debug dump: one row per UE with every SINR component."""
    header = "ue,desired,pilot_contamination,beamforming_uncertainty,noncoherent_interference,noise,sinr"
    rows = np.column_stack(
        [
            np.arange(len(breakdown.sinr)),
            breakdown.desired,
            breakdown.pilot_contamination,
            breakdown.beamforming_uncertainty,
            breakdown.noncoherent_interference,
            breakdown.noise,
            breakdown.sinr,
        ]
    )
    np.savetxt(path, rows, delimiter=",", fmt="%.17g", header=header, comments="")
