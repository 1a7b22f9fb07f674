"""Network layout and Rayleigh channel generation.

Deterministic, seed-driven drops: base stations sit on a fixed lattice,
users are placed uniformly in a per-cell annulus, and each link gets a
distance-based path loss (slope*log10(d)+offset, in dB), i.i.d. lognormal
shadowing and i.i.d. Rayleigh fading per antenna.

Reproducibility contract: identical (config, trial) pairs produce
bit-identical ChannelSets.  Every trial uses its own counter-based
generator (Philox keyed by (seed, trial)), so trials can be generated
independently and in any order.
"""

from dataclasses import dataclass, field

import numpy as np

from .units import dbm_to_watts


@dataclass(frozen=True)
class ScenarioConfig:
    """Multi-cell drop parameters (distances in meters, powers in dBm)."""

    num_bs: int = 3
    users_per_cell: int = 2
    antennas: int = 4
    inter_bs_distance: float = 1000.0
    bandwidth_hz: float = 10e3
    noise_psd_dbm_hz: float = -174.0
    pathloss_slope_db: float = 38.0
    pathloss_offset_db: float = 34.5
    shadowing_sigma_db: float = 8.0
    # One (r_min, r_max) annulus per cell; None means [min_bs_user_distance, D/2]
    # for every cell.
    drop_annuli: tuple = None
    min_bs_user_distance: float = 35.0
    seed: int = 0

    def __post_init__(self):
        if self.num_bs < 1 or self.users_per_cell < 1 or self.antennas < 1:
            raise ValueError("num_bs, users_per_cell and antennas must be >= 1")
        if self.inter_bs_distance <= 0 or self.bandwidth_hz <= 0:
            raise ValueError("inter_bs_distance and bandwidth_hz must be positive")
        if self.min_bs_user_distance <= 0:
            raise ValueError("min_bs_user_distance must be positive")
        for r_min, r_max in self.annuli():
            if r_min < self.min_bs_user_distance or r_max < r_min:
                raise ValueError(
                    "each annulus needs min_bs_user_distance <= r_min <= r_max"
                )

    def annuli(self):
        if self.drop_annuli is None:
            default = (self.min_bs_user_distance, self.inter_bs_distance / 2.0)
            return tuple(default for _ in range(self.num_bs))
        if len(self.drop_annuli) != self.num_bs:
            raise ValueError("drop_annuli must list one (r_min, r_max) per cell")
        return tuple((float(a), float(b)) for a, b in self.drop_annuli)


@dataclass(frozen=True)
class ChannelSet:
    """Channels h[k, b, u, :] from BS k to user u of cell b, plus geometry.

    noise_w holds the per-user AWGN power sigma^2 = W * N0 in Watts.
    Arrays are frozen (read-only) so a ChannelSet can be shared across
    concurrent trials.
    """

    h: np.ndarray          # (B, B, U, M) complex128
    noise_w: np.ndarray    # (B, U) float64
    bs_xy: np.ndarray      # (B, 2)
    user_xy: np.ndarray    # (B, U, 2)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for a in (self.h, self.noise_w, self.bs_xy, self.user_xy):
            a.setflags(write=False)
        if not np.all(np.isfinite(self.h.view(float))):
            raise ValueError("channel entries must be finite")
        if np.any(np.all(self.h == 0, axis=-1)):
            raise ValueError("channel rows must be nonzero")
        if np.any(self.noise_w <= 0):
            raise ValueError("noise power must be positive")

    @property
    def num_bs(self):
        return self.h.shape[0]

    @property
    def users_per_cell(self):
        return self.h.shape[2]

    @property
    def antennas(self):
        return self.h.shape[3]


def pathloss_db(d, slope_db=38.0, offset_db=34.5, min_distance=35.0):
    """Deterministic part of the path loss in dB (shadowing drawn by caller)."""
    d = np.asarray(d, dtype=float)
    if np.any(d < min_distance):
        raise ValueError(f"distance below the {min_distance} m minimum")
    return slope_db * np.log10(d) + offset_db


def noise_power(bandwidth_hz, noise_psd_dbm_hz):
    """Thermal noise power W*N0 in Watts from a PSD given in dBm/Hz."""
    if bandwidth_hz <= 0:
        raise ValueError("bandwidth must be positive")
    return float(dbm_to_watts(noise_psd_dbm_hz) * bandwidth_hz)


def bs_positions(num_bs, spacing):
    """Fixed BS lattice: 7 cells = center plus hexagonal ring, otherwise a
    ring with chord length equal to the inter-BS spacing (B=3 gives the
    equilateral triangle with side D, B=1 a single BS at the origin)."""
    if num_bs == 1:
        return np.zeros((1, 2))
    if num_bs == 7:
        ang = np.pi / 3.0 * np.arange(6)
        ring = spacing * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        return np.vstack([np.zeros(2), ring])
    radius = spacing / (2.0 * np.sin(np.pi / num_bs))
    ang = 2.0 * np.pi * np.arange(num_bs) / num_bs
    return radius * np.stack([np.cos(ang), np.sin(ang)], axis=1)


def _trial_rng(seed, trial):
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def generate_network(cfg: ScenarioConfig, trial: int = 0) -> ChannelSet:
    """Drop users and draw shadowed Rayleigh channels for one trial.

    Fixed draw order (user radii/angles per cell, then shadowing per link,
    then fading per link) keeps the output bit-reproducible.
    """
    B, U, M = cfg.num_bs, cfg.users_per_cell, cfg.antennas
    rng = _trial_rng(cfg.seed, trial)
    bs = bs_positions(B, cfg.inter_bs_distance)
    annuli = cfg.annuli()

    user_xy = np.empty((B, U, 2))
    for b in range(B):
        r_min, r_max = annuli[b]
        # Uniform over the annulus area.
        radii = np.sqrt(rng.uniform(r_min**2, r_max**2, size=U))
        theta = rng.uniform(0.0, 2.0 * np.pi, size=U)
        user_xy[b, :, 0] = bs[b, 0] + radii * np.cos(theta)
        user_xy[b, :, 1] = bs[b, 1] + radii * np.sin(theta)

    shadow_db = cfg.shadowing_sigma_db * rng.standard_normal((B, B, U))
    fading = (rng.standard_normal((B, B, U, M)) + 1j * rng.standard_normal((B, B, U, M))) / np.sqrt(2.0)

    # dist[k, b, u]: BS k to user u of cell b, floored at the minimum
    # BS-user distance to keep the path-loss model in its valid range.
    diff = bs[:, None, None, :] - user_xy[None, :, :, :]
    dist = np.maximum(np.hypot(diff[..., 0], diff[..., 1]), cfg.min_bs_user_distance)

    pl_db = pathloss_db(dist, cfg.pathloss_slope_db, cfg.pathloss_offset_db,
                        cfg.min_bs_user_distance) + shadow_db
    gain = 10.0 ** (-pl_db / 10.0)
    h = np.sqrt(gain)[..., None] * fading

    sigma2 = noise_power(cfg.bandwidth_hz, cfg.noise_psd_dbm_hz)
    noise = np.full((B, U), sigma2)
    meta = {"trial": int(trial), "seed": int(cfg.seed), "annuli": annuli}
    return ChannelSet(h=h, noise_w=noise, bs_xy=bs, user_xy=user_xy, meta=meta)


def save_channelset(path, ch: ChannelSet):
    """Columnar text fixture: one row per (k, b, u) link with re/im pairs."""
    B, _, U, M = ch.h.shape
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# eebeam channelset v1: B={B} U={U} M={M}\n")
        f.write("# noise_w rows (b, u, sigma2):\n")
        for b in range(B):
            for u in range(U):
                f.write(f"noise {b} {u} {ch.noise_w[b, u]!r}\n")
        for b in range(B):
            f.write(f"bs {b} {ch.bs_xy[b, 0]!r} {ch.bs_xy[b, 1]!r}\n")
        for b in range(B):
            for u in range(U):
                f.write(f"user {b} {u} {ch.user_xy[b, u, 0]!r} {ch.user_xy[b, u, 1]!r}\n")
        for k in range(B):
            for b in range(B):
                for u in range(U):
                    row = ch.h[k, b, u]
                    vals = " ".join(f"{v.real!r} {v.imag!r}" for v in row)
                    f.write(f"link {k} {b} {u} {vals}\n")


def load_channelset(path) -> ChannelSet:
    with open(path, encoding="utf-8") as f:
        header = f.readline()
        if not header.startswith("# eebeam channelset v1:"):
            raise ValueError("not an eebeam channelset file")
        parts = dict(tok.split("=") for tok in header.split(":")[1].split())
        B, U, M = int(parts["B"]), int(parts["U"]), int(parts["M"])
        h = np.zeros((B, B, U, M), dtype=complex)
        noise = np.zeros((B, U))
        bs = np.zeros((B, 2))
        users = np.zeros((B, U, 2))
        for line in f:
            if line.startswith("#") or not line.strip():
                continue
            tok = line.split()
            if tok[0] == "noise":
                noise[int(tok[1]), int(tok[2])] = float(tok[3])
            elif tok[0] == "bs":
                bs[int(tok[1])] = [float(tok[2]), float(tok[3])]
            elif tok[0] == "user":
                users[int(tok[1]), int(tok[2])] = [float(tok[3]), float(tok[4])]
            elif tok[0] == "link":
                k, b, u = int(tok[1]), int(tok[2]), int(tok[3])
                vals = np.array([float(x) for x in tok[4:]])
                h[k, b, u] = vals[0::2] + 1j * vals[1::2]
    return ChannelSet(h=h, noise_w=noise, bs_xy=bs, user_xy=users)
