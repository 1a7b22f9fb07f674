"""Power consumption models: circuit, signal-processing and PA dissipation.

Two PA models are supported: constant efficiency (dissipated power is
transmit power / epsilon) and a nonlinear model where per-chain efficiency
scales with the square root of the drive level, eps_max * sqrt(p / P_ant).
Signal-processing power is either a fixed constant or linear in the cell
rate with coefficient p_sp in W/(Gbit/s).

All functions are pure and take the per-cell beamformer block v_cell with
shape (U, M); rates are in bits/s.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinearPA:
    efficiency: float = 0.35

    def __post_init__(self):
        if not 0.0 < self.efficiency < 1.0:
            raise ValueError("PA efficiency must be in (0, 1)")


@dataclass(frozen=True)
class NonlinearPA:
    max_efficiency: float = 0.35
    antenna_budget_w: float = 0.25

    def __post_init__(self):
        if not 0.0 < self.max_efficiency < 1.0:
            raise ValueError("max PA efficiency must be in (0, 1)")
        if self.antenna_budget_w <= 0.0:
            raise ValueError("per-antenna budget must be positive")

    @property
    def eps_tilde(self):
        # Effective efficiency at drive p is eps_tilde * sqrt(p).
        return self.max_efficiency / np.sqrt(self.antenna_budget_w)


@dataclass(frozen=True)
class PowerModelConfig:
    p_static_w: float = 1.9952623149688795      # 33 dBm
    p_dynamic_w: float = 1.0                    # 30 dBm, per antenna
    p_user_w: float = 0.0                       # per served user
    sp_fixed_w: float = 0.0
    p_sp_w_per_gbit: float = 0.0
    rate_dependent: bool = False
    pa: object = LinearPA()

    def __post_init__(self):
        if min(self.p_static_w, self.p_dynamic_w, self.p_user_w,
               self.sp_fixed_w, self.p_sp_w_per_gbit) < 0:
            raise ValueError("power parameters must be nonnegative")


@dataclass(frozen=True)
class PowerBudget:
    per_bs_w: float
    per_antenna_w: float

    def __post_init__(self):
        if self.per_bs_w <= 0 or self.per_antenna_w <= 0:
            raise ValueError("power budgets must be positive")
        if self.per_antenna_w > self.per_bs_w:
            raise ValueError("per-antenna budget cannot exceed the BS budget")

    @classmethod
    def from_dbm(cls, per_bs_dbm, antenna_ratio=None, antennas=None):
        p = 10.0 ** ((per_bs_dbm - 30.0) / 10.0)
        if antenna_ratio is not None:
            return cls(p, antenna_ratio * p)
        if antennas is None:
            raise ValueError("need antenna_ratio or antennas")
        return cls(p, p / antennas)


def circuit_power(num_antennas, num_users, cfg: PowerModelConfig):
    """P_sta + M*P_dyn + U*P_us."""
    return cfg.p_static_w + num_antennas * cfg.p_dynamic_w + num_users * cfg.p_user_w


def pa_power_linear(v_cell, efficiency):
    """Dissipated PA power with constant efficiency: (1/eps) * sum ||v||^2."""
    return float(np.sum(np.abs(v_cell) ** 2) / efficiency)


def pa_power_nonlinear(v_cell, max_efficiency, antenna_budget_w):
    """Square-root efficiency model: (1/eps_tilde) * sum_m sqrt(sum_u |v_um|^2)."""
    eps_tilde = max_efficiency / np.sqrt(antenna_budget_w)
    per_antenna = np.sum(np.abs(v_cell) ** 2, axis=0)
    return float(np.sum(np.sqrt(per_antenna)) / eps_tilde)


def pa_power(v_cell, cfg: PowerModelConfig):
    if isinstance(cfg.pa, LinearPA):
        return pa_power_linear(v_cell, cfg.pa.efficiency)
    return pa_power_nonlinear(v_cell, cfg.pa.max_efficiency, cfg.pa.antenna_budget_w)


def sp_power(rate_bps, cfg: PowerModelConfig):
    """Signal-processing power for a given rate (fixed model ignores the rate)."""
    if rate_bps < 0:
        raise ValueError("rate must be nonnegative")
    if cfg.rate_dependent:
        return cfg.p_sp_w_per_gbit * rate_bps / 1e9
    return cfg.sp_fixed_w


def bs_power(v_cell, rates_cell, cfg: PowerModelConfig):
    """Total consumption of one BS: circuit + signal processing + PA."""
    v_cell = np.asarray(v_cell)
    num_users, num_antennas = v_cell.shape
    return (circuit_power(num_antennas, num_users, cfg)
            + sp_power(float(np.sum(rates_cell)), cfg)
            + pa_power(v_cell, cfg))


def total_power(v, rates, cfg: PowerModelConfig):
    """Network power: sum of bs_power over all cells; v has shape (B, U, M)."""
    return float(sum(bs_power(v[b], rates[b], cfg) for b in range(v.shape[0])))


def user_power(v_cell, u, rates_cell, cfg: PowerModelConfig):
    """Per-user share of the cell consumption.

    The PA term weights each antenna's dissipation by the user's fraction of
    that antenna's drive power (a 0-drive antenna contributes 0, the limit
    value); circuit power is split evenly across the cell's users.
    """
    v_cell = np.asarray(v_cell)
    num_users, num_antennas = v_cell.shape
    per_antenna = np.sum(np.abs(v_cell) ** 2, axis=0)
    own = np.abs(v_cell[u]) ** 2

    if isinstance(cfg.pa, LinearPA):
        pa_share = float(np.sum(own)) / cfg.pa.efficiency
    else:
        eps_tilde = cfg.pa.eps_tilde
        with np.errstate(divide="ignore", invalid="ignore"):
            share = np.where(per_antenna > 0.0, own / np.sqrt(per_antenna), 0.0)
        pa_share = float(np.sum(share)) / eps_tilde

    if cfg.rate_dependent:
        sp_share = cfg.p_sp_w_per_gbit * float(rates_cell[u]) / 1e9
    else:
        sp_share = cfg.sp_fixed_w / num_users

    return (pa_share + sp_share
            + (cfg.p_static_w + num_antennas * cfg.p_dynamic_w) / num_users
            + cfg.p_user_w)
