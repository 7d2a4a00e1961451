"""Network layout, large-scale fading, pilot assignment, and serving-set initialization.

APs and UEs are dropped uniformly on a square that wraps around at the
edges (torus), so no position is privileged.  Large-scale fading follows a
three-slope distance law with optional log-normal shadowing on the far
slope only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "GeometryConfig",
    "Deployment",
    "PilotAssignment",
    "place_network",
    "wrap_distance",
    "wrap_distance_matrix",
    "three_slope_pathloss_db",
    "compute_lsfc",
    "assign_pilots",
    "initial_association",
    "ASSOCIATION_SCHEMES",
    "save_matrix_csv",
    "load_matrix_csv",
    "save_deployment_csv",
]

# Stream offsets so that placement, shadowing, pilot and association draws
# never share a substream even though they share one user-facing seed.
_STREAM_PLACE = 0
_STREAM_SHADOW = 1
_STREAM_PILOT = 2
_STREAM_ASSOC = 3


@dataclass(frozen=True)
class GeometryConfig:
    """Square coverage area with uniformly placed APs and UEs.

    Parameters
    ----------
    side_m : float
        Side length of the square area in metres.
    num_aps, num_ues : int
        Number of access points (each with `antennas_per_ap` antennas)
        and of single-antenna users.
    coherence_len : int
        Channel uses per coherence block.
    pilot_len : int
        Channel uses spent on pilots per block; also the number of
        mutually orthogonal pilot sequences.
    pathloss_d0_m, pathloss_d1_m : float
        Breakpoints of the three-slope distance law (metres).
    pathloss_fixed_db : float
        Fixed loss of the distance law at 1 km on the far slope (dB).
    shadow_std_db : float
        Log-normal shadowing standard deviation (dB); 0 disables it.
        Shadowing applies beyond `pathloss_d1_m` only.
    rng_seed : int
        Seed for placement / shadowing / pilot / association draws.
    """

    side_m: float = 1000.0
    num_aps: int = 20
    num_ues: int = 10
    antennas_per_ap: int = 8
    coherence_len: int = 200
    pilot_len: int = 5
    pathloss_d0_m: float = 10.0
    pathloss_d1_m: float = 50.0
    pathloss_fixed_db: float = 140.7
    shadow_std_db: float = 8.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.side_m <= 0:
            raise ValueError("side_m must be positive")
        for name in ("num_aps", "num_ues", "antennas_per_ap", "coherence_len", "pilot_len"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.pilot_len > self.coherence_len:
            raise ValueError("pilot_len must not exceed coherence_len")
        if not 0 < self.pathloss_d0_m < self.pathloss_d1_m:
            raise ValueError("need 0 < pathloss_d0_m < pathloss_d1_m")
        if self.shadow_std_db < 0:
            raise ValueError("shadow_std_db must be >= 0")
        if self.rng_seed < 0:
            raise ValueError("rng_seed must be >= 0")


@dataclass(frozen=True)
class Deployment:
    """AP and UE coordinates in metres, origin at the area centre."""

    ap_xy: np.ndarray  # (num_aps, 2)
    ue_xy: np.ndarray  # (num_ues, 2)
    side_m: float


def place_network(cfg: GeometryConfig) -> Deployment:
    """Drop APs then UEs i.i.d. uniformly on the square.

    The draw order (APs first) is fixed, so equal seeds give bit-identical
    deployments.
    """
    rng = np.random.default_rng([cfg.rng_seed, _STREAM_PLACE])
    half = cfg.side_m / 2.0
    ap_xy = rng.uniform(-half, half, size=(cfg.num_aps, 2))
    ue_xy = rng.uniform(-half, half, size=(cfg.num_ues, 2))
    return Deployment(ap_xy=ap_xy, ue_xy=ue_xy, side_m=cfg.side_m)


def wrap_distance(p, q, side_m: float) -> np.ndarray:
    """Torus (wrap-around) distance between points p and q.

    Equivalent to the minimum Euclidean distance over the nine shifted
    images of q; computed per axis as min(|dx|, side - |dx|).
    """
    diff = np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))
    diff = np.minimum(diff, side_m - diff)
    return np.sqrt((diff**2).sum(axis=-1))


def wrap_distance_matrix(ap_xy: np.ndarray, ue_xy: np.ndarray, side_m: float) -> np.ndarray:
    """(num_aps, num_ues) matrix of torus distances."""
    return wrap_distance(ap_xy[:, None, :], ue_xy[None, :, :], side_m)


def three_slope_pathloss_db(dist_m, d0_m: float, d1_m: float, fixed_db: float) -> np.ndarray:
    """Distance gain in dB of the three-slope law.

    Constant inside d0, 20 dB per decade between d0 and d1, 35 dB per
    decade beyond d1; continuous at both breakpoints.  Distances enter in
    kilometres.
    """
    d_km = np.asarray(dist_m, dtype=float) / 1000.0
    d0_km = d0_m / 1000.0
    d1_km = d1_m / 1000.0
    # Evaluate the near branch everywhere first, then overwrite outward.
    out = np.full_like(d_km, -fixed_db - 15.0 * np.log10(d1_km) - 20.0 * np.log10(d0_km))
    mid = d_km > d0_km
    with np.errstate(divide="ignore"):
        logd = np.where(d_km > 0, np.log10(np.maximum(d_km, 1e-300)), 0.0)
    out = np.where(mid, -fixed_db - 15.0 * np.log10(d1_km) - 20.0 * logd, out)
    far = d_km > d1_km
    out = np.where(far, -fixed_db - 35.0 * logd, out)
    return out


def compute_lsfc(dep: Deployment, cfg: GeometryConfig) -> np.ndarray:
    """Large-scale fading coefficients beta, shape (num_aps, num_ues), linear scale.

    Log-normal shadowing (`shadow_std_db`) is drawn i.i.d. per link and
    applied on the far slope only, so the near field stays deterministic.
    """
    dist = wrap_distance_matrix(dep.ap_xy, dep.ue_xy, cfg.side_m)
    gain_db = three_slope_pathloss_db(dist, cfg.pathloss_d0_m, cfg.pathloss_d1_m, cfg.pathloss_fixed_db)
    if cfg.shadow_std_db > 0:
        rng = np.random.default_rng([cfg.rng_seed, _STREAM_SHADOW])
        shadow = rng.normal(0.0, cfg.shadow_std_db, size=dist.shape)
        gain_db = gain_db + np.where(dist > cfg.pathloss_d1_m, shadow, 0.0)
    return 10.0 ** (gain_db / 10.0)


@dataclass(frozen=True)
class PilotAssignment:
    """One pilot index per UE out of `pilot_len` orthogonal sequences."""

    pilot_of: np.ndarray  # (num_ues,) int
    pilot_len: int

    def sharers(self, ue: int) -> np.ndarray:
        """Indices of UEs on the same pilot as `ue`, `ue` included."""
        return np.flatnonzero(self.pilot_of == self.pilot_of[ue])

    def sharer_mask(self) -> np.ndarray:
        """(T, T) boolean, True where two UEs share a pilot."""
        return self.pilot_of[:, None] == self.pilot_of[None, :]


def assign_pilots(num_ues: int, pilot_len: int, scheme: str = "round_robin", seed: int = 0) -> PilotAssignment:
    """Assign one of `pilot_len` orthogonal pilots to every UE.

    round_robin cycles pilot indices over UEs in order; random deals the
    same cyclic pattern over a shuffled UE order.  Either way pilots are
    distinct whenever num_ues <= pilot_len.
    """
    if scheme == "round_robin":
        pilot_of = np.arange(num_ues, dtype=int) % pilot_len
    elif scheme == "random":
        rng = np.random.default_rng([seed, _STREAM_PILOT])
        order = rng.permutation(num_ues)
        pilot_of = np.empty(num_ues, dtype=int)
        pilot_of[order] = np.arange(num_ues, dtype=int) % pilot_len
    else:
        raise ValueError(f"unknown pilot scheme: {scheme!r}")
    return PilotAssignment(pilot_of=pilot_of, pilot_len=pilot_len)


ASSOCIATION_SCHEMES = ("top10_aps_per_ue", "top10_ues_per_ap", "all", "lsfc95", "random")


def initial_association(
    beta: np.ndarray,
    scheme: str = "lsfc95",
    seed: int = 0,
    top_k: int = 10,
    lsfc_fraction: float = 0.95,
) -> np.ndarray:
    """Binary starting association matrix, shape like beta, float 0/1.

    Every scheme is repaired so each UE keeps at least one serving AP
    (column argmax of beta).
    """
    num_aps, num_ues = beta.shape
    d = np.zeros((num_aps, num_ues))
    if scheme == "top10_aps_per_ue":
        k = min(top_k, num_aps)
        for t in range(num_ues):
            best = np.argsort(-beta[:, t], kind="stable")[:k]
            d[best, t] = 1.0
    elif scheme == "top10_ues_per_ap":
        k = min(top_k, num_ues)
        for m in range(num_aps):
            best = np.argsort(-beta[m, :], kind="stable")[:k]
            d[m, best] = 1.0
    elif scheme == "all":
        d[:] = 1.0
    elif scheme == "lsfc95":
        d = (beta >= lsfc_fraction * beta.max(axis=0, keepdims=True)).astype(float)
    elif scheme == "random":
        rng = np.random.default_rng([seed, _STREAM_ASSOC])
        d = (rng.random((num_aps, num_ues)) < 0.5).astype(float)
    else:
        raise ValueError(f"unknown association scheme: {scheme!r}")
    orphans = np.flatnonzero(d.sum(axis=0) < 1)
    d[beta[:, orphans].argmax(axis=0), orphans] = 1.0
    return d


# ---------------------------------------------------------------------------
# CSV dumps (full double precision, reloadable)

def save_matrix_csv(path, matrix: np.ndarray) -> None:
    """Write a matrix as CSV, rows = APs, columns = UEs, %.17g precision."""
    np.savetxt(path, np.asarray(matrix, dtype=float), delimiter=",", fmt="%.17g")


def load_matrix_csv(path) -> np.ndarray:
    return np.atleast_2d(np.loadtxt(path, delimiter=","))


def save_deployment_csv(dep: Deployment, ap_path, ue_path) -> None:
    np.savetxt(ap_path, dep.ap_xy, delimiter=",", fmt="%.17g")
    np.savetxt(ue_path, dep.ue_xy, delimiter=",", fmt="%.17g")
