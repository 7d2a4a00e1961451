"""Independent checks of the closed-form model.

Two kinds of oracle live here: channel-level Monte Carlo simulation that
validates the estimation quality and the maximum-ratio branch statistics
of the SINR decomposition, and exhaustive enumeration that scores tiny
instances of the joint association / power problem exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .energy import fixed_power
from .se_model import PowerVector, sinr_coefficient_matrices
from .optimizer import ProblemSpec
from . import se_model

__all__ = [
    "MCConfig",
    "EstimationCheck",
    "simulate_estimation",
    "MrTermCheck",
    "MrValidationReport",
    "mc_validate_mr_terms",
    "BruteForceResult",
    "brute_force_small",
]

_CHUNK = 20_000  # fixed chunk size keeps summation order, hence results, deterministic


@dataclass(frozen=True)
class MCConfig:
    trials: int = 100_000
    rng_seed: int = 0
    tolerance_sigmas: float = 4.0


def _draw_estimates(rng, beta_row, pilots, pilot_power_w, noise_w, antennas, n):
    """Channel and linear estimate draws for one AP over n coherence blocks.

    Returns (g, g_hat) of shape (n, antennas, T).  The estimate projects
    the received pilot block onto each UE's pilot and rescales to the
    conditional-mean coefficient, so UEs sharing a pilot see a common
    projected observation.
    """
    lp = pilots.pilot_len
    num_ues = len(beta_row)
    h = (rng.standard_normal((n, antennas, num_ues)) + 1j * rng.standard_normal((n, antennas, num_ues))) / np.sqrt(2.0)
    g = np.sqrt(beta_row)[None, None, :] * h
    noise = (rng.standard_normal((n, antennas, lp)) + 1j * rng.standard_normal((n, antennas, lp))) * np.sqrt(noise_w / 2.0)
    onehot = np.zeros((num_ues, lp))
    onehot[np.arange(num_ues), pilots.pilot_of] = 1.0
    # projected observation per pilot slot, then gathered per UE
    y_slot = np.sqrt(lp * pilot_power_w) * (g @ onehot) + noise
    slot_energy = beta_row @ onehot
    coeff = np.sqrt(lp * pilot_power_w) * beta_row / (lp * pilot_power_w * slot_energy[pilots.pilot_of] + noise_w)
    g_hat = coeff[None, None, :] * y_slot[:, :, pilots.pilot_of]
    return g, g_hat


@dataclass(frozen=True)
class EstimationCheck:
    gamma_hat: np.ndarray  # per-antenna mean square of the estimate
    stderr: np.ndarray
    gamma_closed: np.ndarray
    z_scores: np.ndarray


def simulate_estimation(
    beta_row: np.ndarray,
    pilots,
    pilot_power_w: float,
    noise_w: float,
    antennas: int,
    mc: MCConfig,
) -> EstimationCheck:
    """Monte Carlo estimate of the per-antenna channel-estimate power at one AP.

    Averages ||g_hat||^2 / antennas over trials; the closed form is the
    estimation quality for the same link.  Standard errors shrink like
    1/sqrt(trials).
    """
    beta_row = np.asarray(beta_row, dtype=float)
    rng = np.random.default_rng([mc.rng_seed, 11])
    num_ues = len(beta_row)
    total = np.zeros(num_ues)
    total_sq = np.zeros(num_ues)
    done = 0
    while done < mc.trials:
        n = min(_CHUNK, mc.trials - done)
        _, g_hat = _draw_estimates(rng, beta_row, pilots, pilot_power_w, noise_w, antennas, n)
        sample = (np.abs(g_hat) ** 2).sum(axis=1) / antennas  # (n, T)
        total += sample.sum(axis=0)
        total_sq += (sample**2).sum(axis=0)
        done += n
    mean = total / mc.trials
    var = np.maximum(total_sq / mc.trials - mean**2, 0.0)
    stderr = np.sqrt(var / mc.trials)
    closed = _closed_gamma(beta_row, pilots, pilot_power_w, noise_w)
    z = np.abs(mean - closed) / np.where(stderr > 0, stderr, 1e-300)
    return EstimationCheck(gamma_hat=mean, stderr=stderr, gamma_closed=closed, z_scores=z)


def _closed_gamma(beta_row, pilots, pilot_power_w, noise_w):
    return se_model.estimation_quality(beta_row[None, :], pilots, pilot_power_w, noise_w)[0]


@dataclass(frozen=True)
class MrTermCheck:
    term: str
    ue: int
    empirical: float
    closed: float
    stderr: float

    @property
    def z_score(self) -> float:
        return abs(self.empirical - self.closed) / max(self.stderr, 1e-300)


@dataclass
class MrValidationReport:
    checks: list = field(default_factory=list)

    @property
    def max_z(self) -> float:
        return max((c.z_score for c in self.checks), default=0.0)

    def passed(self, tolerance_sigmas: float) -> bool:
        return self.max_z <= tolerance_sigmas

    def to_rows(self):
        return [
            (c.term, c.ue, repr(c.empirical), repr(c.closed), repr(c.stderr), repr(c.z_score))
            for c in self.checks
        ]


def mc_validate_mr_terms(
    beta: np.ndarray,
    pilots,
    assoc: np.ndarray,
    weights: np.ndarray,
    pv: PowerVector,
    noise_w: float,
    antennas: int,
    mc: MCConfig,
) -> MrValidationReport:
    """Simulate the maximum-ratio branch and compare each SINR term statistic.

    All served UEs must be weak (no zero-forcing), which holds when the
    grouping threshold exceeds 1.  Per UE the desired-signal mean, the
    beamforming-uncertainty variance, the eta-weighted cross-interference
    power, and the combined noise power are estimated and checked against
    the closed-form desired / uncertainty / non-coherent / noise terms.
    """
    beta = np.asarray(beta, dtype=float)
    num_aps, num_ues = beta.shape
    gamma = se_model.estimation_quality(beta, pilots, pv.p_p, noise_w)
    grouping = se_model.classify_users(beta, assoc, pilots, 1.5, antennas)
    assert not grouping.strong.any(), "oracle instance must be maximum-ratio only"
    if len(np.unique(pilots.pilot_of)) != num_ues:
        raise ValueError("term validation requires mutually orthogonal pilots")
    bd = se_model.sinr_terms(pv, assoc, weights, beta, gamma, grouping, pilots, antennas, noise_w)
    rho = pv.p_u / noise_w
    da = np.asarray(assoc, dtype=float) * np.asarray(weights, dtype=float)

    rng = np.random.default_rng([mc.rng_seed, 23])
    sharer = pilots.sharer_mask()
    # accumulators: desired-signal inner product, its square, cross powers, noise power
    n_tr = mc.trials
    sum_ip = np.zeros(num_ues, dtype=complex)
    sum_ip_sq = np.zeros(num_ues)
    sum_ip_4 = np.zeros(num_ues)
    sum_cross = np.zeros((num_ues, num_ues))
    sum_cross_sq = np.zeros((num_ues, num_ues))
    sum_np = np.zeros(num_ues)
    sum_np_sq = np.zeros(num_ues)
    done = 0
    while done < n_tr:
        n = min(_CHUNK, n_tr - done)
        ip_total = np.zeros((n, num_ues), dtype=complex)
        cross_total = np.zeros((n, num_ues, num_ues), dtype=complex)
        noise_total = np.zeros((n, num_ues), dtype=complex)
        for m in range(num_aps):
            g, g_hat = _draw_estimates(rng, beta[m], pilots, pv.p_p, noise_w, antennas, n)
            data_noise = (
                rng.standard_normal((n, antennas)) + 1j * rng.standard_normal((n, antennas))
            ) * np.sqrt(noise_w / 2.0)
            # combined fusion statistics: sum over APs of d a ghat^H (.)
            inner = np.einsum("nat,nau->ntu", np.conj(g_hat), g)
            ip_total += da[m][None, :] * inner[:, np.arange(num_ues), np.arange(num_ues)]
            cross_total += da[m][None, :, None] * inner
            noise_total += da[m][None, :] * np.einsum("nat,na->nt", np.conj(g_hat), data_noise)
        sum_ip += ip_total.sum(axis=0)
        sum_ip_sq += (np.abs(ip_total) ** 2).sum(axis=0)
        sum_ip_4 += (np.abs(ip_total) ** 4).sum(axis=0)
        cross_pow = np.abs(cross_total) ** 2
        sum_cross += cross_pow.sum(axis=0)
        sum_cross_sq += (cross_pow**2).sum(axis=0)
        npow = np.abs(noise_total) ** 2
        sum_np += npow.sum(axis=0)
        sum_np_sq += (npow**2).sum(axis=0)
        done += n

    report = MrValidationReport()
    mean_ip = sum_ip / n_tr
    mean_sq = sum_ip_sq / n_tr
    var_sq = np.maximum(sum_ip_4 / n_tr - mean_sq**2, 0.0)
    for t in range(num_ues):
        # desired signal: E{sum_m d a ghat^H g} against the coherent amplitude
        amp_closed = float(np.sqrt(bd.desired[t] / (rho * pv.eta[t]))) if pv.eta[t] > 0 else float(
            antennas * (da[:, t] * gamma[:, t]).sum()
        )
        se_amp = np.sqrt(max(mean_sq[t] - np.abs(mean_ip[t]) ** 2, 0.0) / n_tr)
        report.checks.append(
            MrTermCheck("desired_amplitude", t, float(mean_ip[t].real), amp_closed, float(se_amp))
        )
        # beamforming uncertainty: variance of the same inner product
        var_ip = mean_sq[t] - np.abs(mean_ip[t]) ** 2
        bu_closed = float(bd.beamforming_uncertainty[t] / (rho * pv.eta[t])) if pv.eta[t] > 0 else float(
            antennas * ((da[:, t] ** 2) * gamma[:, t] * beta[:, t]).sum()
        )
        se_var = np.sqrt(max(var_sq[t] - (mean_sq[t] - np.abs(mean_ip[t]) ** 2) ** 2, 0.0) / n_tr)
        report.checks.append(MrTermCheck("uncertainty_variance", t, float(var_ip), bu_closed, float(se_var)))
        # non-coherent interference: eta-weighted cross powers from non-sharing UEs
        ni_emp = 0.0
        ni_var = 0.0
        for tp in range(num_ues):
            if tp == t or sharer[t, tp]:
                continue
            ni_emp += rho * pv.eta[tp] * sum_cross[t, tp] / n_tr
            ni_var += (rho * pv.eta[tp]) ** 2 * max(
                sum_cross_sq[t, tp] / n_tr - (sum_cross[t, tp] / n_tr) ** 2, 0.0
            )
        report.checks.append(
            MrTermCheck(
                "cross_interference",
                t,
                float(ni_emp),
                float(bd.noncoherent_interference[t]),
                float(np.sqrt(ni_var / n_tr)),
            )
        )
        # combined noise after fusion, normalized by the noise power
        np_emp = sum_np[t] / n_tr / noise_w
        np_var = max(sum_np_sq[t] / n_tr - (sum_np[t] / n_tr) ** 2, 0.0) / noise_w**2
        report.checks.append(
            MrTermCheck("noise_power", t, float(np_emp), float(bd.noise[t]), float(np.sqrt(np_var / n_tr)))
        )
    return report


# ---------------------------------------------------------------------------
# Exhaustive oracle for tiny joint problems


@dataclass(frozen=True)
class BruteForceResult:
    ee: float
    assoc: np.ndarray
    eta: np.ndarray
    feasible: bool
    evaluations: int


def brute_force_small(ps: ProblemSpec, eta_grid: int = 11) -> BruteForceResult:
    """Exhaustive maximum of the exact EE over binary associations and a power grid.

    Every coverage-feasible binary association is paired with every point
    of a uniform per-UE power grid on [0, 1]; each pair is scored by the
    exact pipeline (regrouping included).  Ties keep the lexicographically
    lowest association.  Only tiny instances are allowed.
    """
    num_aps, num_ues = ps.beta.shape
    if num_aps * num_ues > 12 or num_ues > 3:
        raise ValueError("brute force limited to num_aps*num_ues <= 12 and num_ues <= 3")
    if not 2 <= eta_grid <= 21:
        raise ValueError("eta_grid must lie in [2, 21]")
    grid = np.linspace(0.0, 1.0, eta_grid)
    eta_all = np.array(list(itertools.product(grid, repeat=num_ues)))  # (G, T)
    fixed = fixed_power(num_aps, num_ues, ps.antennas_per_ap, ps.energy)
    rho = ps.rho
    bandwidth = ps.energy.bandwidth_hz
    best = None
    evals = 0
    for bits in itertools.product((0.0, 1.0), repeat=num_aps * num_ues):
        d = np.array(bits).reshape(num_aps, num_ues)
        if np.any(d.sum(axis=0) < 1):
            continue
        grouping = se_model.classify_users(ps.beta, d, ps.pilots, ps.strong_fraction, ps.antennas_per_ap)
        weights = se_model.lsfd_weights(ps.gamma, grouping, d, ps.lsfd_mode)
        ds_amp, k_pc, k_other, n0 = sinr_coefficient_matrices(
            d, weights, ps.beta, ps.gamma, grouping, ps.pilots, ps.antennas_per_ap
        )
        ktot = k_pc + k_other
        desired = rho * eta_all * ds_amp[None, :] ** 2
        interference = rho * (eta_all @ ktot.T) + n0[None, :]
        with np.errstate(invalid="ignore", divide="ignore"):
            sinr = np.where(interference > 0, desired / np.where(interference > 0, interference, 1.0), 0.0)
        se_tot = ps.prelog * np.log2(1.0 + sinr).sum(axis=1)
        evals += len(eta_all)
        ok = se_tot >= ps.se_qos - 1e-12
        if not np.any(ok):
            continue
        thr = bandwidth * se_tot
        transmit = eta_all.sum(axis=1) * ps.p_u / ps.energy.amplifier_eff
        links = float(d.sum()) * ps.energy.link_cost_w(ps.antennas_per_ap)
        if not ps.energy.lsfd_per_link:
            links += num_ues * ps.energy.p_cpu_lsfd_w
        ptot = fixed + transmit + links + ps.energy.p_cpu_decode_w_per_bps * thr
        ee = np.where(ok, thr / ptot, -1.0)
        idx = int(np.argmax(ee))
        if best is None or ee[idx] > best[0]:
            best = (float(ee[idx]), d, eta_all[idx].copy())
    if best is None:
        return BruteForceResult(
            ee=0.0,
            assoc=np.zeros_like(ps.beta),
            eta=np.zeros(num_ues),
            feasible=False,
            evaluations=evals,
        )
    return BruteForceResult(ee=best[0], assoc=best[1], eta=best[2], feasible=True, evaluations=evals)
