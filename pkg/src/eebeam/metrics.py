"""SINR, rates and the energy-efficiency objectives.

This is the evaluation ground truth: every optimizer in the package is
scored by re-evaluating its beamformers here.  Rates are reported in
bits/s (base-2 logarithm) and efficiencies in bits/Joule.
"""

from dataclasses import dataclass

import numpy as np

from . import power as pw


@dataclass(frozen=True)
class BeamformerSet:
    """Transmit beamformers v[b, u, :] for user u of cell b."""

    v: np.ndarray  # (B, U, M) complex128

    def __post_init__(self):
        if not np.all(np.isfinite(self.v.view(float))):
            raise ValueError("beamformer entries must be finite")

    @property
    def shape(self):
        return self.v.shape


def validate_weights(weights, num_bs):
    w = np.asarray(weights, dtype=float)
    if w.shape != (num_bs,):
        raise ValueError(f"need one weight per BS, got shape {w.shape}")
    if np.any(w <= 0.0) or np.any(w > 1.0):
        raise ValueError("weights must lie in (0, 1]")
    return w


def _as_array(v):
    return v.v if isinstance(v, BeamformerSet) else np.asarray(v)


def interference(ch, v, b, u):
    """Intra- plus inter-cell interference power at user (b, u)."""
    v = _as_array(v)
    B, U, _ = v.shape
    total = 0.0
    for k in range(B):
        for i in range(U):
            if k == b and i == u:
                continue
            total += abs(np.vdot(ch.h[k, b, u].conj(), v[k, i])) ** 2
    return total


def sinr(ch, v, b, u):
    v = _as_array(v)
    sig = abs(np.vdot(ch.h[b, b, u].conj(), v[b, u])) ** 2
    return sig / (interference(ch, v, b, u) + ch.noise_w[b, u])


def sinr_all(ch, v):
    """All SINRs at once, shape (B, U)."""
    v = _as_array(v)
    B, U, _ = v.shape
    # amp[k, i, b, u] = h_{k,(b,u)} . v_{k,i}
    amp = np.einsum("kbum,kim->kibu", ch.h, v)
    p = np.abs(amp) ** 2
    total = p.sum(axis=(0, 1))
    own = p[np.arange(B)[:, None], np.arange(U)[None, :],
            np.arange(B)[:, None], np.arange(U)[None, :]]
    return own / (total - own + ch.noise_w)


def user_rate(ch, v, b, u, bandwidth_hz):
    return bandwidth_hz * np.log2(1.0 + sinr(ch, v, b, u))


def user_rates(ch, v, bandwidth_hz):
    return bandwidth_hz * np.log2(1.0 + sinr_all(ch, v))


def network_rate(ch, v, bandwidth_hz):
    return float(np.sum(user_rates(ch, v, bandwidth_hz)))


def jain_index(values):
    """(sum x)^2 / (n sum x^2); equals 1 iff all entries are equal."""
    x = np.asarray(values, dtype=float)
    denom = len(x) * float(np.sum(x**2))
    if denom == 0.0:
        return 1.0
    return float(np.sum(x)) ** 2 / denom


@dataclass(frozen=True)
class EEReport:
    per_user_rate: np.ndarray   # (B, U) bits/s
    per_bs_rate: np.ndarray     # (B,) bits/s
    per_bs_power: np.ndarray    # (B,) Watts
    per_bs_ee: np.ndarray       # (B,) bits/J
    nee: float
    swee: float
    wpee: float                 # raw weighted product, mixed units
    wpee_geomean: float         # (weighted product)^(1/sum w), bits/J
    min_ee: float
    max_ee: float
    jain: float

    CSV_FIELDS = ("nee", "swee", "wpee", "wpee_geomean", "min_ee", "max_ee", "jain")

    def csv_row(self):
        return ",".join(f"{getattr(self, f):.10g}" for f in self.CSV_FIELDS)


def evaluate(ch, v, weights, power_cfg: pw.PowerModelConfig, bandwidth_hz=None) -> EEReport:
    """Score a beamformer set against all four EE objectives.

    bandwidth_hz defaults to the value implied by ch.meta when present;
    pass it explicitly when evaluating synthetic channel sets.
    """
    v = _as_array(v)
    B = v.shape[0]
    w = validate_weights(weights, B)
    if bandwidth_hz is None:
        bandwidth_hz = ch.meta.get("bandwidth_hz") if ch.meta else None
    if bandwidth_hz is None:
        raise ValueError("bandwidth_hz required to convert SINR to rates")

    rates = user_rates(ch, v, bandwidth_hz)
    cell_rates = rates.sum(axis=1)
    cell_power = np.array([pw.bs_power(v[b], rates[b], power_cfg) for b in range(B)])
    cell_ee = cell_rates / cell_power

    wpee = float(np.prod(cell_ee**w))
    return EEReport(
        per_user_rate=rates,
        per_bs_rate=cell_rates,
        per_bs_power=cell_power,
        per_bs_ee=cell_ee,
        nee=float(cell_rates.sum() / cell_power.sum()),
        swee=float(np.sum(w * cell_ee)),
        wpee=wpee,
        wpee_geomean=float(wpee ** (1.0 / np.sum(w))),
        min_ee=float(cell_ee.min()),
        max_ee=float(cell_ee.max()),
        jain=jain_index(cell_ee),
    )


def user_centric_ee(ch, v, power_cfg: pw.PowerModelConfig, bandwidth_hz):
    """Per-user EE (rate over the user's power share), evaluation only."""
    v = _as_array(v)
    B, U, _ = v.shape
    rates = user_rates(ch, v, bandwidth_hz)
    ee = np.zeros((B, U))
    for b in range(B):
        for u in range(U):
            ee[b, u] = rates[b, u] / pw.user_power(v[b], u, rates[b], power_cfg)
    return ee
