"""Wideband multi-user channels for a uniform planar array, and DFT codebooks.

Array convention: the UPA lies in the y-z plane with half-wavelength spacing,
``M_ant_rows`` elements along z and ``M_ant_cols`` along y, flattened row-major
(element ``m = row * cols + col``). A plane wave with unit direction
``u = (sin(zen) cos(az), sin(zen) sin(az), cos(zen))`` produces the per-element
phase ``pi * (row * u_z + col * u_y)``.

Generators return small-scale fading normalised so that the average gain per
element is one. Large-scale gains (pathloss, shadowing, penetration) come from
:func:`large_scale_gains` and are applied by the caller.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class ChannelError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelParams:
    """Channel model and user-drop settings of a rate run."""

    model: str = "clustered"  # "clustered" | "rayleigh"
    n_clusters: int = 6
    rays_per_cluster: int = 8
    angular_spread_deg: float = 5.0  # intra-cluster ray spread
    delay_spread: float = 100e-9
    # cluster centres scatter around the line-of-sight direction
    cluster_azimuth_spread_deg: float = 30.0
    cluster_zenith_spread_deg: float = 8.0
    rician_k_db: float = 9.0
    # per-user LoS: True/False for all users, a tuple of flags, or "umi" to draw
    # from the UMi street-canyon LoS probability
    los: bool | tuple[bool, ...] | str = "umi"
    n_sc_eval: int = 64
    frequency_flat: bool = False  # rayleigh only
    # large-scale gains; "none" keeps unit gains
    large_scale: str = "umi"
    min_distance: float = 10.0
    cell_radius: float = 150.0
    sector_deg: float = 120.0
    bs_height: float = 10.0
    ue_height: float = 1.5
    indoor_fraction: float = 0.8
    shadowing: bool = True

    def __post_init__(self):
        if self.model not in ("clustered", "rayleigh"):
            raise ChannelError(f"unknown channel model {self.model!r}")
        if self.large_scale not in ("umi", "none"):
            raise ChannelError(f"unknown large-scale model {self.large_scale!r}")
        if self.n_clusters < 1 or self.rays_per_cluster < 1:
            raise ChannelError("clusters must contain at least one ray")
        if self.angular_spread_deg < 0:
            raise ChannelError("angular spread must be >= 0")
        if self.delay_spread < 0:
            raise ChannelError("delay spread must be >= 0")
        if self.n_sc_eval < 1:
            raise ChannelError("n_sc_eval must be >= 1")
        if not 0 < self.min_distance <= self.cell_radius:
            raise ChannelError("need 0 < min_distance <= cell_radius")
        if not 0 <= self.indoor_fraction <= 1:
            raise ChannelError("indoor_fraction must lie in [0, 1]")
        if isinstance(self.los, str) and self.los != "umi":
            raise ChannelError(f"los must be a bool, a tuple of bools or 'umi', got {self.los!r}")


@dataclass
class ChannelRealization:
    """Per-subcarrier channel matrices ``H[nu]`` of shape ``(K, M_ant)``."""

    H: np.ndarray  # (N_sc, K, M_ant) complex
    freqs: np.ndarray  # subcarrier offsets from the carrier, Hz
    model: str
    seed: object = None
    positions: np.ndarray | None = None  # (K, 3) metres, BS at origin
    los: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_sc(self) -> int:
        return self.H.shape[0]

    @property
    def K(self) -> int:
        return self.H.shape[1]

    @property
    def M_ant(self) -> int:
        return self.H.shape[2]

    def scaled(self, gains: np.ndarray) -> "ChannelRealization":
        """Apply per-user power gains (linear)."""
        amp = np.sqrt(np.asarray(gains, dtype=float))
        return ChannelRealization(self.H * amp[None, :, None], self.freqs, self.model,
                                  self.seed, self.positions, self.los,
                                  dict(self.meta, gains=np.asarray(gains, dtype=float)))


def subcarrier_offsets(q: int, delta_f: float, n_eval: int) -> np.ndarray:
    """Frequencies of ``n_eval`` evenly spaced subcarriers out of ``q``, centred on the carrier."""
    idx = np.round(np.linspace(0, q - 1, min(n_eval, q)))
    return (idx - (q - 1) / 2) * delta_f


def upa_steering(rows: int, cols: int, u_z, u_y) -> np.ndarray:
    """Unit-modulus steering vectors for direction cosines ``u_z``, ``u_y``.

    Broadcasts over the leading shape of the inputs; returns ``(..., rows*cols)``.
    """
    u_z = np.asarray(u_z, dtype=float)[..., None, None]
    u_y = np.asarray(u_y, dtype=float)[..., None, None]
    r = np.arange(rows)[:, None]
    c = np.arange(cols)[None, :]
    a = np.exp(1j * np.pi * (r * u_z + c * u_y))
    return a.reshape(*a.shape[:-2], rows * cols)


def direction_cosines(zenith, azimuth) -> tuple[np.ndarray, np.ndarray]:
    zenith = np.asarray(zenith, dtype=float)
    azimuth = np.asarray(azimuth, dtype=float)
    return np.cos(zenith), np.sin(zenith) * np.sin(azimuth)


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def generate_rayleigh(K: int, M_ant: int, N_sc: int, seed=None, frequency_flat: bool = False,
                      freqs: np.ndarray | None = None) -> ChannelRealization:
    """I.i.d. CN(0, 1) entries, independent per subcarrier unless ``frequency_flat``."""
    if K < 1 or M_ant < 1 or N_sc < 1:
        raise ChannelError("dimensions must be positive")
    rng = _rng(seed)
    n = 1 if frequency_flat else N_sc
    H = (rng.standard_normal((n, K, M_ant)) + 1j * rng.standard_normal((n, K, M_ant))) / np.sqrt(2)
    if frequency_flat:
        H = np.broadcast_to(H, (N_sc, K, M_ant)).copy()
    if freqs is None:
        freqs = np.zeros(N_sc)
    return ChannelRealization(H, np.asarray(freqs, dtype=float), "rayleigh", seed)


@dataclass
class Rays:
    """Multipath components of all users; every array is ``(K, n_rays)``."""

    gains: np.ndarray  # complex amplitudes
    zenith: np.ndarray
    azimuth: np.ndarray
    delays: np.ndarray


def channel_from_rays(rays: Rays, rows: int, cols: int, freqs: np.ndarray) -> np.ndarray:
    """``H[nu, k, :] = sum_r g_kr a(zen_kr, az_kr) exp(-j 2 pi f_nu tau_kr)``."""
    u_z, u_y = direction_cosines(rays.zenith, rays.azimuth)
    a = upa_steering(rows, cols, u_z, u_y)  # (K, R, M)
    phase = np.exp(-2j * np.pi * np.asarray(freqs)[:, None, None] * rays.delays[None])  # (N, K, R)
    coeff = phase * rays.gains[None]
    return np.einsum("nkr,krm->nkm", coeff, a, optimize=True)


def drop_users(K: int, params: ChannelParams, seed=None) -> tuple[np.ndarray, np.ndarray]:
    """Uniform user positions over the sector annulus and per-user LoS flags."""
    rng = _rng(seed)
    r2 = rng.uniform(params.min_distance ** 2, params.cell_radius ** 2, K)
    d2d = np.sqrt(r2)
    half = np.deg2rad(params.sector_deg) / 2
    az = rng.uniform(-half, half, K)
    pos = np.stack([d2d * np.cos(az), d2d * np.sin(az),
                    np.full(K, params.ue_height - params.bs_height)], axis=1)
    if isinstance(params.los, str):
        p_los = np.where(d2d <= 18.0, 1.0, 18.0 / d2d + np.exp(-d2d / 36.0) * (1 - 18.0 / d2d))
        los = rng.uniform(size=K) < p_los
    elif isinstance(params.los, (bool, np.bool_)):
        los = np.full(K, bool(params.los))
    else:
        if len(params.los) != K:
            raise ChannelError(f"los has {len(params.los)} flags for {K} users")
        los = np.asarray(params.los, dtype=bool)
    return pos, los


def los_angles(positions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x, y, z = positions.T
    d2d = np.hypot(x, y)
    return np.arctan2(d2d, z), np.arctan2(y, x)


def generate_clustered(K: int, upa_dims: tuple[int, int], N_sc: int,
                       params: ChannelParams | None = None, seed=None,
                       freqs: np.ndarray | None = None,
                       positions: np.ndarray | None = None,
                       los: np.ndarray | None = None) -> ChannelRealization:
    """Clustered multipath channel around each user's line-of-sight direction.

    Cluster delays are exponential with mean ``delay_spread`` and powers decay
    as ``exp(-tau / delay_spread)`` with 3 dB log-normal spread. Rays scatter
    around the cluster centre with ``angular_spread_deg`` standard deviation.
    LoS users get an extra direct ray with Rician factor ``rician_k_db``.
    Ray powers of each user sum to one.
    """
    params = params or ChannelParams()
    if params.angular_spread_deg < 0:
        raise ChannelError("angular spread must be >= 0")
    rows, cols = upa_dims
    if K < 1 or rows < 1 or cols < 1 or N_sc < 1:
        raise ChannelError("dimensions must be positive")
    rng = _rng(seed)
    if positions is None:
        positions, drawn_los = drop_users(K, params, rng)
        los = drawn_los if los is None else los
    elif los is None:
        los = np.zeros(K, dtype=bool)
    if freqs is None:
        freqs = np.linspace(-200e6, 200e6, N_sc) if N_sc > 1 else np.zeros(1)
    freqs = np.asarray(freqs, dtype=float)
    if freqs.shape != (N_sc,):
        raise ChannelError("freqs must have N_sc entries")

    C, R = params.n_clusters, params.rays_per_cluster
    zen0, az0 = los_angles(positions)

    tau_c = -params.delay_spread * np.log(rng.uniform(size=(K, C)))
    tau_c -= tau_c.min(axis=1, keepdims=True)
    if params.delay_spread > 0:
        p_c = np.exp(-tau_c / params.delay_spread)
    else:
        p_c = np.ones((K, C))
    p_c *= 10 ** (-rng.normal(0.0, 3.0, (K, C)) / 10)
    p_c /= p_c.sum(axis=1, keepdims=True)

    zen_c = zen0[:, None] + np.deg2rad(params.cluster_zenith_spread_deg) * rng.standard_normal((K, C))
    az_c = az0[:, None] + np.deg2rad(params.cluster_azimuth_spread_deg) * rng.standard_normal((K, C))
    spread = np.deg2rad(params.angular_spread_deg)
    zen = zen_c[:, :, None] + spread * rng.standard_normal((K, C, R))
    az = az_c[:, :, None] + spread * rng.standard_normal((K, C, R))
    jitter = 0.05 * params.delay_spread * rng.uniform(size=(K, C, R))
    delays = tau_c[:, :, None] + jitter
    amp = np.sqrt(np.broadcast_to(p_c[:, :, None] / R, (K, C, R)))
    gains = amp * np.exp(2j * np.pi * rng.uniform(size=(K, C, R)))

    zen, az = zen.reshape(K, -1), az.reshape(K, -1)
    delays, gains = delays.reshape(K, -1), gains.reshape(K, -1)

    k_r = 10 ** (params.rician_k_db / 10)
    los = np.asarray(los, dtype=bool)
    nlos_scale = np.where(los, 1 / np.sqrt(1 + k_r), 1.0)
    los_amp = np.where(los, np.sqrt(k_r / (1 + k_r)), 0.0)
    gains = np.concatenate([gains * nlos_scale[:, None],
                            (los_amp * np.exp(2j * np.pi * rng.uniform(size=K)))[:, None]], axis=1)
    zen = np.concatenate([zen, zen0[:, None]], axis=1)
    az = np.concatenate([az, az0[:, None]], axis=1)
    delays = np.concatenate([delays, np.zeros((K, 1))], axis=1)

    rays = Rays(gains, zen, az, delays)
    H = channel_from_rays(rays, rows, cols, freqs)
    return ChannelRealization(H, freqs, "clustered", seed, positions, los, {"rays": rays})


def _umi_pathloss_db(d2d, d3d, f_c, h_bs, h_ut, los):
    fc = f_c / 1e9
    d_bp = 4 * (h_bs - 1) * (h_ut - 1) * f_c / SPEED_OF_LIGHT
    pl1 = 32.4 + 21 * np.log10(d3d) + 20 * np.log10(fc)
    pl2 = (32.4 + 40 * np.log10(d3d) + 20 * np.log10(fc)
           - 9.5 * np.log10(d_bp ** 2 + (h_bs - h_ut) ** 2))
    pl_los = np.where(d2d <= d_bp, pl1, pl2)
    pl_nlos = 35.3 * np.log10(d3d) + 22.4 + 21.3 * np.log10(fc) - 0.3 * (h_ut - 1.5)
    return np.where(los, pl_los, np.maximum(pl_los, pl_nlos))


def large_scale_gains(positions: np.ndarray, los: np.ndarray, f_c: float,
                      params: ChannelParams, seed=None) -> np.ndarray:
    """Linear power gains from UMi street-canyon pathloss, shadowing and O2I loss.

    Follows the 3GPP TR 38.901 UMi formulas with the low-loss building
    penetration model for indoor users. Returns ones when
    ``params.large_scale == "none"``.
    """
    K = positions.shape[0]
    if params.large_scale == "none":
        return np.ones(K)
    rng = _rng(seed)
    d2d = np.hypot(positions[:, 0], positions[:, 1])
    d3d = np.linalg.norm(positions, axis=1)
    pl = _umi_pathloss_db(d2d, d3d, f_c, params.bs_height, params.ue_height, los)
    if params.shadowing:
        pl = pl + rng.standard_normal(K) * np.where(los, 4.0, 7.82)
    indoor = rng.uniform(size=K) < params.indoor_fraction
    fc = f_c / 1e9
    l_glass, l_concrete = 2 + 0.2 * fc, 5 + 4 * fc
    pl_tw = 5 - 10 * np.log10(0.3 * 10 ** (-l_glass / 10) + 0.7 * 10 ** (-l_concrete / 10))
    d_in = np.minimum(rng.uniform(0, 25, K), rng.uniform(0, 25, K))
    o2i = pl_tw + 0.5 * d_in + (rng.standard_normal(K) * 4.4 if params.shadowing else 0.0)
    pl = pl + np.where(indoor, o2i, 0.0)
    return 10 ** (-pl / 10)


# codebook ---------------------------------------------------------------------

@dataclass(frozen=True)
class Codebook:
    """2D-DFT beams of a ``rows x cols`` subarray; ``beams[:, b]`` is beam ``b``.

    Beam ``b = p * cols + q`` has entries
    ``exp(j 2 pi (p i / rows + q j / cols)) / sqrt(rows * cols)``.
    """

    rows: int
    cols: int
    beams: np.ndarray

    @property
    def size(self) -> int:
        return self.beams.shape[1]

    def matched_direction(self, b: int) -> tuple[float, float]:
        """Direction cosines ``(u_z, u_y)`` whose steering vector ``a`` gives
        ``|a^T w_b|^2 = rows * cols``."""
        p, q = divmod(b, self.cols)
        u_z = (-2.0 * p / self.rows + 1.0) % 2.0 - 1.0
        u_y = (-2.0 * q / self.cols + 1.0) % 2.0 - 1.0
        return u_z, u_y


def dft_codebook(subarray_rows: int, subarray_cols: int) -> Codebook:
    if subarray_rows < 1 or subarray_cols < 1:
        raise ChannelError("subarray dimensions must be positive")
    n = subarray_rows * subarray_cols
    row_dft = np.exp(2j * np.pi * np.outer(np.arange(subarray_rows), np.arange(subarray_rows)) / subarray_rows)
    col_dft = np.exp(2j * np.pi * np.outer(np.arange(subarray_cols), np.arange(subarray_cols)) / subarray_cols)
    return Codebook(subarray_rows, subarray_cols, np.kron(row_dft, col_dft) / np.sqrt(n))


def subarray_shape(rows: int, cols: int, m_ps: int) -> tuple[int, int]:
    """Most nearly square ``(sub_rows, sub_cols)`` tiling of the array with ``m_ps`` elements."""
    best = None
    for sr in range(1, rows + 1):
        if rows % sr or m_ps % sr:
            continue
        sc = m_ps // sr
        if sc > cols or cols % sc:
            continue
        key = (abs(sr - sc), sr > sc)
        if best is None or key < best[0]:
            best = (key, (sr, sc))
    if best is None:
        raise ChannelError(f"a {rows}x{cols} array cannot be tiled into subarrays of {m_ps} elements")
    return best[1]


# binary dump ------------------------------------------------------------------

_MAGIC = b"FR3H"


def save_realization(path: str | Path, realization: ChannelRealization) -> None:
    """Write ``H`` as a little-endian header (magic, ndim, dims) plus row-major complex64."""
    H = np.ascontiguousarray(realization.H, dtype="<c8")
    header = _MAGIC + struct.pack("<I", H.ndim) + struct.pack(f"<{H.ndim}I", *H.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(H.tobytes(order="C"))


def load_realization(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if data[:4] != _MAGIC:
        raise ChannelError(f"{path}: not a channel dump")
    (ndim,) = struct.unpack_from("<I", data, 4)
    dims = struct.unpack_from(f"<{ndim}I", data, 8)
    offset = 8 + 4 * ndim
    expected = int(np.prod(dims)) * 8
    if len(data) - offset != expected:
        raise ChannelError(f"{path}: payload has {len(data) - offset} bytes, expected {expected}")
    return np.frombuffer(data, dtype="<c8", offset=offset).reshape(dims).astype(np.complex128)


def realize(K: int, rows: int, cols: int, freqs: np.ndarray, f_c: float,
            params: ChannelParams, seed=None) -> ChannelRealization:
    """One drop: user positions, small-scale fading and large-scale gains."""
    rng = _rng(seed)
    positions, los = drop_users(K, params, rng)
    n = len(freqs)
    if params.model == "rayleigh":
        small = generate_rayleigh(K, rows * cols, n, rng, params.frequency_flat, freqs)
        small.positions, small.los = positions, los
    else:
        small = generate_clustered(K, (rows, cols), n, params, rng, freqs, positions, los)
    small.seed = seed
    return small.scaled(large_scale_gains(positions, los, f_c, params, rng))


__all__: Sequence[str] = [
    "ChannelParams", "ChannelRealization", "Codebook", "Rays", "ChannelError",
    "generate_rayleigh", "generate_clustered", "channel_from_rays", "dft_codebook",
    "subarray_shape", "upa_steering", "direction_cosines", "drop_users", "large_scale_gains",
    "subcarrier_offsets", "save_realization", "load_realization", "realize",
]
