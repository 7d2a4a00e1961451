"""System power consumption and energy efficiency.

Total consumed power splits into a topology-independent fixed part, a
circuit part that scales with transmit powers and active fronthaul links,
and a decoding part proportional to the delivered throughput.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EnergyConstants",
    "fixed_power",
    "circuit_power",
    "total_power",
    "energy_efficiency",
]


@dataclass(frozen=True)
class EnergyConstants:
    """Power-consumption constants, all in watts unless stated otherwise.

    The decoding constant is watts per bit/s of delivered throughput.
    `lsfd_per_link` charges the fusion-processing term once per active
    AP-UE link (default); switched off it is charged once per UE instead.
    """

    p_ue_circuit_w: float = 0.1
    p_ap_circuit_w: float = 0.1  # per antenna
    p_proc_w: float = 0.8  # per antenna of an active link
    p_fronthaul_fixed_w: float = 0.825  # per AP
    p_signaling_w: float = 0.01  # per active link
    p_cpu_fixed_w: float = 5.0
    p_cpu_lsfd_w: float = 1.0
    p_cpu_decode_w_per_bps: float = 1e-9  # 1000 mW per Gbit/s
    amplifier_eff: float = 0.4
    bandwidth_hz: float = 20e6
    lsfd_per_link: bool = True

    def __post_init__(self):
        for name in (
            "p_ue_circuit_w",
            "p_ap_circuit_w",
            "p_proc_w",
            "p_fronthaul_fixed_w",
            "p_signaling_w",
            "p_cpu_fixed_w",
            "p_cpu_lsfd_w",
            "p_cpu_decode_w_per_bps",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if not 0 < self.amplifier_eff <= 1:
            raise ValueError("amplifier_eff must lie in (0, 1]")
        if self.bandwidth_hz <= 0:
            raise ValueError("bandwidth_hz must be positive")

    def link_cost_w(self, antennas_per_ap: int) -> float:
        """Circuit cost of one active AP-UE link."""
        cost = antennas_per_ap * self.p_proc_w + self.p_signaling_w
        if self.lsfd_per_link:
            cost += self.p_cpu_lsfd_w
        return cost


def fixed_power(num_aps: int, num_ues: int, antennas_per_ap: int, k: EnergyConstants) -> float:
    """Always-on power: UE and AP circuits, fronthaul, central fixed load."""
    return (
        num_ues * k.p_ue_circuit_w
        + num_aps * antennas_per_ap * k.p_ap_circuit_w
        + num_aps * k.p_fronthaul_fixed_w
        + k.p_cpu_fixed_w
    )


def circuit_power(pv, assoc: np.ndarray, k: EnergyConstants, antennas_per_ap: int) -> float:
    """Transmit power over amplifier efficiency plus per-link processing cost.

    Affine in the association matrix, which may be fractional during
    relaxation: half a link costs half its circuits.
    """
    transmit = float(np.sum(pv.eta) * pv.p_u / k.amplifier_eff)
    links = float(np.sum(assoc))
    link_cost = links * k.link_cost_w(antennas_per_ap)
    if not k.lsfd_per_link:
        link_cost += len(pv.eta) * k.p_cpu_lsfd_w
    return transmit + link_cost


def total_power(fixed_w: float, circuit_w: float, throughput_bps: float, k: EnergyConstants) -> float:
    """Fixed plus circuit plus throughput-proportional decoding power."""
    return fixed_w + circuit_w + k.p_cpu_decode_w_per_bps * throughput_bps


def energy_efficiency(sum_se_bits_per_hz: float, total_power_w: float, bandwidth_hz: float) -> float:
    """Delivered bits per joule: bandwidth times total SE over total power."""
    if total_power_w <= 0:
        raise ValueError("total power must be positive")
    return bandwidth_hz * sum_se_bits_per_hz / total_power_w
