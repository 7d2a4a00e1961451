"""Joint power-allocation and AP-UE association for maximum energy efficiency.

The binary association is relaxed to [0, 1] and the SINR ratio and the
EE ratio are both rewritten with quadratic-transform auxiliaries, giving
a surrogate objective f = 2 b sqrt(u) - b^2 v that lower-bounds the
reduced energy efficiency (decoding power dropped) and touches it when
the auxiliaries are refreshed.  One outer iteration refreshes the
auxiliaries, maximizes f over the power fractions, refreshes again, and
maximizes f over the relaxed association; both subproblems are concave
after substituting q = sqrt(eta) and are solved by projected gradient
ascent with backtracking.  The minimum sum-SE constraint is enforced
with an exact penalty whose weight doubles until the subproblem solution
meets it, so iterates keep the constraint and the objective never
decreases.  Afterwards the association is rounded, repaired for coverage
and for the SE constraint, and the result is re-evaluated exactly,
including the throughput-proportional decoding power.

Grouping and fusion weights are computed once from the fully connected
association and held fixed while optimizing, so the relaxed association
ranges over every link; the final evaluation regroups from the rounded
binary matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyConstants, circuit_power, energy_efficiency, fixed_power, total_power
from .se_model import (
    Grouping,
    PowerVector,
    SINRBreakdown,
    classify_users,
    link_statistic_bases,
    lsfd_weights,
    sinr_coefficient_matrices,
    sinr_terms,
    sum_se,
)

__all__ = [
    "DegenerateInterference",
    "QoSInfeasible",
    "RoundingInfeasible",
    "ProblemSpec",
    "SolverParams",
    "SurrogateState",
    "SolveTrace",
    "Solution",
    "Evaluation",
    "update_z",
    "update_b",
    "surrogate_state",
    "project_coverage",
    "solve_eta_subproblem",
    "solve_assoc_subproblem",
    "round_association",
    "evaluate_configuration",
    "optimize",
]

_LN2 = float(np.log(2.0))


class DegenerateInterference(Exception):
    """Desired power without any interference-plus-noise; cannot happen with gamma > 0."""


class QoSInfeasible(Exception):
    """No subproblem point reaches the required sum SE."""


class RoundingInfeasible(Exception):
    """Even the fully connected rounded association misses the required sum SE."""


@dataclass(frozen=True)
class ProblemSpec:
    """Frozen per-instance data the optimizer works on.

    `grouping` and `weights` are the fixed fusion structure used while
    optimizing (built from the fully connected association); exact
    re-evaluation of a binary association regroups on the fly.
    """

    beta: np.ndarray
    gamma: np.ndarray
    pilots: object
    grouping: Grouping
    weights: np.ndarray
    energy: EnergyConstants
    antennas_per_ap: int
    p_u: float
    p_p: float
    noise_w: float
    prelog: float
    se_qos: float = 0.0
    strong_fraction: float = 0.95
    lsfd_mode: str = "uniform"

    @property
    def num_aps(self) -> int:
        return self.beta.shape[0]

    @property
    def num_ues(self) -> int:
        return self.beta.shape[1]

    @property
    def rho(self) -> float:
        return self.p_u / self.noise_w

    def qos_tol(self) -> float:
        return 1e-8 * max(1.0, self.se_qos)


@dataclass(frozen=True)
class SolverParams:
    eps: float = 5e-3  # relative change of the association-step objective that stops the loop
    max_iters: int = 50
    inner_max: int = 400
    grad_tol: float = 1e-6
    step_floor: float = 1e-12
    armijo: float = 1e-4
    penalty_scale: float = 10.0
    penalty_max_doublings: int = 40
    round_threshold: float = 0.5
    polish_passes: int = 3  # greedy exact-refinement passes after rounding; 0 disables
    polish_add_candidates: int = 4  # strongest unused APs probed per UE in a polish pass


@dataclass(frozen=True)
class SurrogateState:
    """Auxiliaries and bound values frozen at one iterate."""

    z: np.ndarray  # (T,) SINR-transform auxiliaries
    b: float  # EE-transform auxiliary
    gamma_star: np.ndarray  # (T,) surrogate SINR values at the iterate
    u: float  # throughput at gamma_star, bit/s
    v: float  # fixed plus circuit power, watts


@dataclass
class SolveTrace:
    """Per outer iteration history of the alternating solve."""

    iteration: list = field(default_factory=list)
    objective: list = field(default_factory=list)  # f after the association step
    objective_power_step: list = field(default_factory=list)  # f after the power step
    reduced_ee: list = field(default_factory=list)
    full_ee: list = field(default_factory=list)
    sum_se_model: list = field(default_factory=list)
    qos_ok: list = field(default_factory=list)
    max_violation: list = field(default_factory=list)
    eta_norm: list = field(default_factory=list)
    fractionality: list = field(default_factory=list)

    def append(self, **kw):
        for key, val in kw.items():
            getattr(self, key).append(val)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("iteration,f,ee,sum_se,fractionality\n")
            for i in range(len(self.iteration)):
                fh.write(
                    f"{self.iteration[i]},{float(self.objective[i])!r},{float(self.full_ee[i])!r},"
                    f"{float(self.sum_se_model[i])!r},{float(self.fractionality[i])!r}\n"
                )


@dataclass(frozen=True)
class Evaluation:
    """Exact metrics of one binary association and power vector."""

    breakdown: SINRBreakdown
    se: np.ndarray
    sum_se: float
    fixed_w: float
    circuit_w: float
    total_w: float
    throughput_bps: float
    ee: float
    reduced_ee: float


@dataclass(frozen=True)
class Solution:
    eta: PowerVector
    assoc: np.ndarray
    ee: float
    sum_se: float
    status: str  # converged | max_iters | infeasible
    iterations: int
    evaluation: Evaluation | None = None


# ---------------------------------------------------------------------------
# Auxiliary updates


def update_z(breakdown: SINRBreakdown) -> np.ndarray:
    """Optimal SINR-transform auxiliary sqrt(DS)/I at the current iterate."""
    ds = breakdown.desired
    denom = breakdown.interference
    if np.any((denom <= 0) & (ds > 0)):
        raise DegenerateInterference("positive desired power with zero interference-plus-noise")
    return np.where(denom > 0, np.sqrt(ds) / np.where(denom > 0, denom, 1.0), 0.0)


def _throughput_bps(gamma_star: np.ndarray, prelog: float, bandwidth_hz: float) -> float:
    return float(prelog * bandwidth_hz * np.sum(np.log2(1.0 + np.maximum(gamma_star, -0.999999999999))))


def update_b(gamma_star: np.ndarray, static_power_w: float, prelog: float, bandwidth_hz: float) -> float:
    """Optimal EE-transform auxiliary sqrt(u)/v at the current iterate."""
    u = _throughput_bps(gamma_star, prelog, bandwidth_hz)
    if u <= 0:
        return 0.0
    return float(np.sqrt(u) / static_power_w)


def _model_breakdown(ps: ProblemSpec, eta: np.ndarray, assoc: np.ndarray) -> SINRBreakdown:
    """SINR of the relaxed model: fixed full grouping and weights, fractional association."""
    pv = PowerVector(eta=eta, p_u=ps.p_u, p_p=ps.p_p)
    return sinr_terms(
        pv, assoc, ps.weights, ps.beta, ps.gamma, ps.grouping, ps.pilots, ps.antennas_per_ap, ps.noise_w
    )


def _static_power(ps: ProblemSpec, eta: np.ndarray, assoc: np.ndarray) -> float:
    pv = PowerVector(eta=eta, p_u=ps.p_u, p_p=ps.p_p)
    fixed = fixed_power(ps.num_aps, ps.num_ues, ps.antennas_per_ap, ps.energy)
    return fixed + circuit_power(pv, assoc, ps.energy, ps.antennas_per_ap)


def surrogate_state(ps: ProblemSpec, eta: np.ndarray, assoc: np.ndarray) -> SurrogateState:
    """Refresh both auxiliaries at (eta, assoc); the surrogate is tight there."""
    bd = _model_breakdown(ps, eta, assoc)
    z = update_z(bd)
    gamma_star = bd.sinr.copy()
    v = _static_power(ps, eta, assoc)
    u = _throughput_bps(gamma_star, ps.prelog, ps.energy.bandwidth_hz)
    b = update_b(gamma_star, v, ps.prelog, ps.energy.bandwidth_hz)
    return SurrogateState(z=z, b=b, gamma_star=gamma_star, u=u, v=v)


def surrogate_objective(state: SurrogateState) -> float:
    """f = 2 b sqrt(u) - b^2 v at bound values; equals u/v when the auxiliaries are fresh."""
    return 2.0 * state.b * np.sqrt(max(state.u, 0.0)) - state.b**2 * state.v


# ---------------------------------------------------------------------------
# Feasible-set projections


def project_coverage(d) -> np.ndarray:
    """Euclidean projection of one association column onto [0,1]^M with sum >= 1.

    Clip to the box; if the sum falls short, shift all entries by the
    KKT constant found by bisection before clipping again.
    """
    d = np.asarray(d, dtype=float)
    x = np.clip(d, 0.0, 1.0)
    if x.sum() >= 1.0 - 1e-15:
        return x
    lo, hi = 0.0, 1.0 + max(0.0, -float(d.min()))
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if np.clip(d + mid, 0.0, 1.0).sum() >= 1.0:
            hi = mid
        else:
            lo = mid
    return np.clip(d + hi, 0.0, 1.0)


def _project_assoc(d: np.ndarray) -> np.ndarray:
    """Column-wise coverage projection of a whole association matrix, vectorized."""
    x = np.clip(d, 0.0, 1.0)
    short = x.sum(axis=0) < 1.0 - 1e-15
    if not np.any(short):
        return x
    sub = np.ascontiguousarray(d[:, short])
    lo = np.zeros(sub.shape[1])
    hi = 1.0 + np.maximum(0.0, -sub.min(axis=0))
    buf = np.empty_like(sub)
    # 50 halvings of a range <= 2 resolve the shift to double precision
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        np.add(sub, mid[None, :], out=buf)
        np.clip(buf, 0.0, 1.0, out=buf)
        ok = buf.sum(axis=0) >= 1.0
        np.copyto(hi, mid, where=ok)
        np.copyto(lo, mid, where=~ok)
    np.add(sub, hi[None, :], out=buf)
    np.clip(buf, 0.0, 1.0, out=buf)
    x[:, short] = buf
    return x


# ---------------------------------------------------------------------------
# Subproblem objectives (concave on their domains)


class _PowerObjective:
    """Surrogate objective over q = sqrt(eta) at fixed association and auxiliaries."""

    def __init__(self, ps: ProblemSpec, assoc: np.ndarray, z: np.ndarray, b: float):
        ds_amp, k_pc, k_other, n0 = sinr_coefficient_matrices(
            assoc, ps.weights, ps.beta, ps.gamma, ps.grouping, ps.pilots, ps.antennas_per_ap
        )
        rho = ps.rho
        self.lin = 2.0 * z * np.sqrt(rho) * ds_amp  # multiplies q_t in s_t
        self.qmat = (z**2)[:, None] * rho * (k_pc + k_other)  # row t against q'^2
        self.cons = z**2 * n0
        self.b = float(b)
        self.wb_ln = ps.prelog * ps.energy.bandwidth_hz / _LN2
        self.w_ln = ps.prelog / _LN2
        self.se_qos = ps.se_qos
        pv_cost = ps.p_u / ps.energy.amplifier_eff
        self.v_quad = pv_cost  # times sum q^2
        self.v0 = _static_power(ps, np.zeros(ps.num_ues), assoc)

    @staticmethod
    def project(q: np.ndarray) -> np.ndarray:
        return np.clip(q, 0.0, 1.0)

    def _parts(self, q):
        s = self.lin * q - self.qmat @ (q * q) - self.cons
        if np.any(s <= -1.0 + 1e-12):
            return s, None, None
        logs = np.log1p(s)
        total = float(logs.sum())
        return s, logs, total

    def value(self, q):
        """(objective, qos violation) at q; -inf objective outside the log domain."""
        s, _, total = self._parts(q)
        if total is None:
            return -np.inf, np.inf
        u = self.wb_ln * total
        v = self.v0 + self.v_quad * float(np.sum(q * q))
        f = 2.0 * self.b * np.sqrt(max(u, 0.0)) - self.b**2 * v
        viol = max(0.0, self.se_qos - self.w_ln * total)
        return f, viol

    def value_grad(self, q, lam: float):
        s, _, total = self._parts(q)
        if total is None:
            return -np.inf, np.zeros_like(q)
        u = self.wb_ln * total
        v = self.v0 + self.v_quad * float(np.sum(q * q))
        sqrt_u = np.sqrt(max(u, 0.0))
        f = 2.0 * self.b * sqrt_u - self.b**2 * v
        viol = max(0.0, self.se_qos - self.w_ln * total)
        g1 = 1.0 / (1.0 + s)
        dlog = g1 * self.lin - 2.0 * q * (self.qmat.T @ g1)  # d total / d q
        grad = (self.b / max(sqrt_u, 1e-300)) * self.wb_ln * dlog - self.b**2 * 2.0 * self.v_quad * q
        if viol > 0.0:
            grad = grad + lam * self.w_ln * dlog
        return f - lam * viol, grad

    def surrogate_sinr(self, q):
        return self.lin * q - self.qmat @ (q * q) - self.cons


class _AssocObjective:
    """Surrogate objective over the relaxed association at fixed powers and auxiliaries."""

    def __init__(self, ps: ProblemSpec, eta: np.ndarray, z: np.ndarray, b: float):
        amp, amp_over_beta, zf_quad, mr_quad = link_statistic_bases(
            ps.weights, ps.beta, ps.gamma, ps.grouping, ps.antennas_per_ap
        )
        rho = ps.rho
        self.amp = amp
        self.aob = amp_over_beta
        self.beta = ps.beta
        self.z = z
        self.b = float(b)
        self.rho = rho
        self.eta = np.asarray(eta, dtype=float)
        self.sq = np.sqrt(rho * self.eta)
        self.lin = 2.0 * z * self.sq  # times C_t(D)
        h_zf = (ps.beta - ps.gamma) @ self.eta  # per-AP eta-weighted residual power
        h_mr = ps.beta @ self.eta
        self.qq = rho * (zf_quad * h_zf[:, None] + mr_quad * h_mr[:, None]) + zf_quad + mr_quad
        mask = ps.pilots.sharer_mask() & ~np.eye(ps.num_ues, dtype=bool)
        self.pc_mask = mask
        self.wb_ln = ps.prelog * ps.energy.bandwidth_hz / _LN2
        self.w_ln = ps.prelog / _LN2
        self.se_qos = ps.se_qos
        self.link_cost = ps.energy.link_cost_w(ps.antennas_per_ap)
        self.v0 = _static_power(ps, self.eta, np.zeros_like(ps.beta))

    @staticmethod
    def project(d: np.ndarray) -> np.ndarray:
        return _project_assoc(d)

    def _sinr_parts(self, d):
        c_lin = (d * self.amp).sum(axis=0)
        h = (d * self.aob).T @ self.beta  # coherent cross amplitudes
        h = np.where(self.pc_mask, h, 0.0)
        pc = self.rho * (h**2 @ self.eta)
        quad = (d * d * self.qq).sum(axis=0)
        s = self.lin * c_lin - self.z**2 * (pc + quad)
        return s, h

    def value(self, d):
        s, _ = self._sinr_parts(d)
        if np.any(s <= -1.0 + 1e-12):
            return -np.inf, np.inf
        total = float(np.log1p(s).sum())
        u = self.wb_ln * total
        v = self.v0 + self.link_cost * float(d.sum())
        f = 2.0 * self.b * np.sqrt(max(u, 0.0)) - self.b**2 * v
        viol = max(0.0, self.se_qos - self.w_ln * total)
        return f, viol

    def value_grad(self, d, lam: float):
        s, h = self._sinr_parts(d)
        if np.any(s <= -1.0 + 1e-12):
            return -np.inf, np.zeros_like(d)
        total = float(np.log1p(s).sum())
        u = self.wb_ln * total
        v = self.v0 + self.link_cost * float(d.sum())
        sqrt_u = np.sqrt(max(u, 0.0))
        f = 2.0 * self.b * sqrt_u - self.b**2 * v
        viol = max(0.0, self.se_qos - self.w_ln * total)
        g1 = 1.0 / (1.0 + s)
        # d s_t / d d_mt, assembled per link
        coef = 2.0 * self.rho * h * self.eta[None, :]  # (t, t') pilot-sharing chain
        ds_dd = (
            self.lin[None, :] * self.amp
            - (self.z**2)[None, :] * (self.aob * (self.beta @ coef.T) + 2.0 * d * self.qq)
        )
        dlog = g1[None, :] * ds_dd
        grad = (self.b / max(sqrt_u, 1e-300)) * self.wb_ln * dlog - self.b**2 * self.link_cost
        if viol > 0.0:
            grad = grad + lam * self.w_ln * dlog
        return f - lam * viol, grad

    def surrogate_sinr(self, d):
        return self._sinr_parts(d)[0]


# ---------------------------------------------------------------------------
# Projected gradient ascent with backtracking


def _projected_ascent(value_grad, project, x0: np.ndarray, prm: SolverParams):
    x = project(np.array(x0, dtype=float))
    fval, grad = value_grad(x)
    step = None
    stall = 0
    for it in range(prm.inner_max):
        # fixed-point check of the projected-gradient map, amortized
        if it % 8 == 0:
            probe = project(x + grad)
            if np.max(np.abs(probe - x)) <= prm.grad_tol:
                break
        alpha = 4.0 * step if step is not None else 1.0 / (1.0 + float(np.max(np.abs(grad))))
        accepted = False
        while alpha >= prm.step_floor:
            cand = project(x + alpha * grad)
            dx = cand - x
            gdx = float(np.sum(grad * dx))
            if gdx > 0.0:
                fc, gc = value_grad(cand)
                if np.isfinite(fc) and fc >= fval + prm.armijo * gdx:
                    gain = fc - fval
                    x, fval, grad = cand, fc, gc
                    step = alpha
                    accepted = True
                    stall = stall + 1 if gain <= 1e-9 * max(1.0, abs(fval)) else 0
                    break
            alpha *= 0.5
        if not accepted or stall >= 3:
            break
    return x, fval


def _restore_feasible(obj, x: np.ndarray, anchor: np.ndarray, tol: float):
    """Bisect from x toward a feasible anchor until the QoS violation clears."""
    _, viol_a = obj.value(anchor)
    if viol_a > 0.5 * tol:
        return None
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        _, v = obj.value(x + mid * (anchor - x))
        if v <= 0.5 * tol:
            hi = mid
        else:
            lo = mid
    return x + hi * (anchor - x)


def _solve_subproblem(obj, x_in: np.ndarray, anchor: np.ndarray, prm: SolverParams, tol: float):
    """Maximize obj subject to its QoS constraint, never below the incoming value.

    The incoming point is expected (quasi-)feasible; the exact penalty
    weight doubles until the solution is feasible again.  If no feasible
    improvement is found the incoming point is returned unchanged, which
    keeps the outer objective monotone.
    """
    f_in, viol_in = obj.value(x_in)
    if viol_in > tol:
        _, viol_anchor = obj.value(anchor)
        if viol_anchor > tol:
            raise QoSInfeasible("required sum SE unreachable in subproblem")
    lam = prm.penalty_scale * max(1.0, abs(f_in)) / max(1.0, obj.se_qos)
    for _ in range(prm.penalty_max_doublings):
        x, _ = _projected_ascent(lambda y: obj.value_grad(y, lam), obj.project, x_in, prm)
        f_x, viol_x = obj.value(x)
        cand = x if viol_x <= tol else _restore_feasible(obj, x, anchor, tol)
        if cand is None and viol_in <= 0.5 * tol:
            cand = _restore_feasible(obj, x, x_in, tol)
        if cand is not None:
            f_c, viol_c = obj.value(cand)
            if viol_c <= tol and (f_c >= f_in or viol_in > tol):
                return cand, f_c
        lam *= 2.0
    return np.array(x_in, dtype=float), f_in


def solve_eta_subproblem(ps: ProblemSpec, prm: SolverParams, assoc: np.ndarray, z: np.ndarray, b: float, eta_init: np.ndarray):
    """Maximize the surrogate over the power fractions at a fixed association.

    Returns (eta, u, v, gamma_star, objective).
    """
    obj = _PowerObjective(ps, assoc, z, b)
    q_in = np.sqrt(np.clip(eta_init, 0.0, 1.0))
    q, fval = _solve_subproblem(obj, q_in, np.ones_like(q_in), prm, ps.qos_tol())
    eta = q * q
    gamma_star = obj.surrogate_sinr(q)
    total = float(np.log1p(np.maximum(gamma_star, -0.999999999999)).sum())
    u = obj.wb_ln * total
    v = obj.v0 + obj.v_quad * float(np.sum(eta))
    return eta, u, v, gamma_star, fval


def solve_assoc_subproblem(ps: ProblemSpec, prm: SolverParams, eta: np.ndarray, z: np.ndarray, b: float, assoc_init: np.ndarray):
    """Maximize the surrogate over the relaxed association at fixed powers.

    Returns (assoc, u, v, gamma_star, objective).
    """
    obj = _AssocObjective(ps, eta, z, b)
    d_in = _project_assoc(np.array(assoc_init, dtype=float))
    d, fval = _solve_subproblem(obj, d_in, np.ones_like(d_in), prm, ps.qos_tol())
    gamma_star = obj.surrogate_sinr(d)
    total = float(np.log1p(np.maximum(gamma_star, -0.999999999999)).sum())
    u = obj.wb_ln * total
    v = obj.v0 + obj.link_cost * float(d.sum())
    return d, u, v, gamma_star, fval


# ---------------------------------------------------------------------------
# Exact evaluation and rounding


def evaluate_configuration(ps: ProblemSpec, eta: np.ndarray, assoc: np.ndarray) -> Evaluation:
    """Exact metrics of a binary association: regroup, reweigh, full power model."""
    grouping = classify_users(
        ps.beta, assoc, ps.pilots, ps.strong_fraction, ps.antennas_per_ap
    )
    weights = lsfd_weights(ps.gamma, grouping, assoc, ps.lsfd_mode)
    pv = PowerVector(eta=eta, p_u=ps.p_u, p_p=ps.p_p)
    bd = sinr_terms(
        pv, assoc, weights, ps.beta, ps.gamma, grouping, ps.pilots, ps.antennas_per_ap, ps.noise_w
    )
    se, total_se = sum_se(bd, ps.prelog)
    fixed = fixed_power(ps.num_aps, ps.num_ues, ps.antennas_per_ap, ps.energy)
    circ = circuit_power(pv, assoc, ps.energy, ps.antennas_per_ap)
    thr = ps.energy.bandwidth_hz * total_se
    ptot = total_power(fixed, circ, thr, ps.energy)
    ee = energy_efficiency(total_se, ptot, ps.energy.bandwidth_hz)
    return Evaluation(
        breakdown=bd,
        se=se,
        sum_se=total_se,
        fixed_w=fixed,
        circuit_w=circ,
        total_w=ptot,
        throughput_bps=thr,
        ee=ee,
        reduced_ee=thr / (fixed + circ),
    )


def round_association(ps: ProblemSpec, prm: SolverParams, eta: np.ndarray, assoc_relaxed: np.ndarray):
    """Threshold the relaxed association, then repair coverage and the SE floor.

    Dropped links are re-added greedily by descending relaxed value until
    the exact sum SE meets the requirement.  Returns (binary association,
    exact Evaluation).
    """
    relaxed = np.asarray(assoc_relaxed, dtype=float)
    d = (relaxed >= prm.round_threshold).astype(float)
    orphans = np.flatnonzero(d.sum(axis=0) < 1)
    if orphans.size:
        d[relaxed[:, orphans].argmax(axis=0), orphans] = 1.0
    ev = evaluate_configuration(ps, eta, d)
    tol = ps.qos_tol()
    if ev.sum_se >= ps.se_qos - tol:
        return d, ev
    flat = relaxed.ravel()
    order = np.lexsort((np.arange(flat.size), -flat))
    for idx in order:
        if d.ravel()[idx] == 1.0:
            continue
        d.flat[idx] = 1.0
        ev = evaluate_configuration(ps, eta, d)
        if ev.sum_se >= ps.se_qos - tol:
            return d, ev
    raise RoundingInfeasible("full association still misses the required sum SE")


def _polish_exact(ps: ProblemSpec, prm: SolverParams, eta: np.ndarray, d: np.ndarray, ev: Evaluation):
    """Greedy coordinate refinement of the rounded configuration, scored exactly.

    The relaxed model keeps the fusion structure of the fully connected
    association, so its optimum can sit slightly off the exact optimum of
    the rounded configuration; small discrete probes close that gap.
    Probes per pass: snap each power coefficient to a box end, drop or add
    one link, swap a serving AP for one of the strongest unused ones.  A
    probe is kept only when it raises the exact EE and keeps the sum-SE
    floor, so the refinement is monotone in the exact objective.
    """
    tol = ps.qos_tol()
    eta = eta.copy()
    d = d.copy()
    min_gain = 1.0 + 1e-12
    for _ in range(prm.polish_passes):
        improved = False
        for t in range(ps.num_ues):
            for val in (0.0, 1.0):
                if eta[t] == val:
                    continue
                cand = eta.copy()
                cand[t] = val
                ev_c = evaluate_configuration(ps, cand, d)
                if ev_c.sum_se >= ps.se_qos - tol and ev_c.ee > ev.ee * min_gain:
                    eta, ev, improved = cand, ev_c, True
        for t in range(ps.num_ues):
            serving = np.flatnonzero(d[:, t] == 1.0)
            spare = np.flatnonzero(d[:, t] == 0.0)
            if spare.size:
                k = min(prm.polish_add_candidates, spare.size)
                adds = spare[np.argsort(-ps.beta[spare, t], kind="stable")[:k]]
            else:
                adds = spare
            moves = []
            if serving.size > 1:
                moves += [(m, None) for m in serving]
            moves += [(None, j) for j in adds]
            moves += [(m, j) for m in serving for j in adds]
            for drop, add in moves:
                cand = d.copy()
                if drop is not None:
                    cand[drop, t] = 0.0
                if add is not None:
                    cand[add, t] = 1.0
                ev_c = evaluate_configuration(ps, eta, cand)
                if ev_c.sum_se >= ps.se_qos - tol and ev_c.ee > ev.ee * min_gain:
                    d, ev, improved = cand, ev_c, True
                    break  # serving set of this UE changed; revisit next pass
        if not improved:
            break
    return eta, d, ev


# ---------------------------------------------------------------------------
# Outer loop


def _model_sum_se(ps: ProblemSpec, eta: np.ndarray, assoc: np.ndarray) -> float:
    bd = _model_breakdown(ps, eta, assoc)
    return float(ps.prelog * np.sum(np.log2(1.0 + bd.sinr)))


def _fractionality(d: np.ndarray) -> float:
    return float(np.mean(2.0 * np.minimum(d, 1.0 - d)))


def _infeasible_solution(ps: ProblemSpec, eta: np.ndarray, assoc: np.ndarray, iters: int, trace: SolveTrace):
    pv = PowerVector(eta=np.zeros(ps.num_ues), p_u=ps.p_u, p_p=ps.p_p)
    return (
        Solution(eta=pv, assoc=np.asarray(assoc), ee=0.0, sum_se=0.0, status="infeasible", iterations=iters),
        trace,
    )


def optimize(ps: ProblemSpec, eta_init: np.ndarray, assoc_init: np.ndarray, prm: SolverParams | None = None):
    """Alternating maximization of the reduced EE, then rounding and exact scoring.

    Returns (Solution, SolveTrace).  Infeasible instances (the fully
    connected full-power configuration misses the SE floor) come back
    with status "infeasible" and zero EE.
    """
    prm = prm or SolverParams()
    trace = SolveTrace()
    tol = ps.qos_tol()
    full = np.ones_like(ps.beta)
    ones_eta = np.ones(ps.num_ues)
    best_probe = evaluate_configuration(ps, ones_eta, full)
    if best_probe.sum_se < ps.se_qos - tol:
        return _infeasible_solution(ps, eta_init, assoc_init, 0, trace)

    eta = np.clip(np.asarray(eta_init, dtype=float), 0.0, 1.0)
    d = _project_assoc(np.array(assoc_init, dtype=float))
    # Feasible start: grow powers, then fall back to every link.
    while _model_sum_se(ps, eta, d) < ps.se_qos - tol:
        if np.any(eta < 1.0):
            eta = np.minimum(1.0, np.maximum(eta * 2.0, 1e-3))
        elif not np.all(d == 1.0):
            d = full.copy()
        else:
            break

    status = "max_iters"
    f2_prev = None
    iters = 0
    try:
        for it in range(1, prm.max_iters + 1):
            iters = it
            state = surrogate_state(ps, eta, d)
            eta, _, _, _, f1 = solve_eta_subproblem(ps, prm, d, state.z, state.b, eta)
            state = surrogate_state(ps, eta, d)
            d, _, _, _, f2 = solve_assoc_subproblem(ps, prm, eta, state.z, state.b, d)

            state_after = surrogate_state(ps, eta, d)
            reduced = state_after.u / state_after.v if state_after.v > 0 else 0.0
            thr = state_after.u
            full_ee = thr / (state_after.v + ps.energy.p_cpu_decode_w_per_bps * thr)
            model_se = thr / ps.energy.bandwidth_hz
            qos_gap = max(0.0, ps.se_qos - model_se)
            trace.append(
                iteration=it,
                objective=float(f2),
                objective_power_step=float(f1),
                reduced_ee=reduced,
                full_ee=full_ee,
                sum_se_model=model_se,
                qos_ok=bool(qos_gap <= tol),
                max_violation=qos_gap,
                eta_norm=float(np.linalg.norm(eta)),
                fractionality=_fractionality(d),
            )
            if f2_prev is not None and abs(f2 - f2_prev) <= prm.eps * max(abs(f2_prev), 1e-300):
                status = "converged"
                break
            f2_prev = f2
    except QoSInfeasible:
        return _infeasible_solution(ps, eta, d, iters, trace)

    try:
        d_bin, ev = round_association(ps, prm, eta, d)
    except RoundingInfeasible:
        return _infeasible_solution(ps, eta, d, iters, trace)
    eta, d_bin, ev = _polish_exact(ps, prm, eta, d_bin, ev)
    pv = PowerVector(eta=eta, p_u=ps.p_u, p_p=ps.p_p)
    sol = Solution(
        eta=pv,
        assoc=d_bin,
        ee=ev.ee,
        sum_se=ev.sum_se,
        status=status,
        iterations=iters,
        evaluation=ev,
    )
    return sol, trace
