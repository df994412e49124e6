"""Hybrid partially-connected and fully-digital ZF beamformers.

Each RF chain drives one contiguous ``sub_rows x sub_cols`` subarray through
phase shifters set to a 2D-DFT codebook beam. The analog stage is frequency
flat; the digital ZF stage is computed per subcarrier on the effective channel
``H_eff = H W_ana`` and scaled so that ``||W_ana W_dig[nu]||_F = 1``. Combiners
are the conjugate transposes of the precoders (reciprocity).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import Codebook, dft_codebook, subarray_shape


class DegenerateChannelError(ArithmeticError):
    """The effective channel is (numerically) rank deficient."""


# eigenvalue ratio of H_eff H_eff^H below which the drop counts as degenerate
RANK_TOL = 1e-12


@dataclass
class BeamformerSet:
    rows: int
    cols: int
    sub_rows: int
    sub_cols: int
    W_dig: np.ndarray  # (N_sc, M_rf, K)
    analog: np.ndarray | None  # (M_rf, M_ps) phase-only weights, None when fully digital
    beam_indices: np.ndarray | None = None

    @property
    def fully_digital(self) -> bool:
        return self.analog is None

    @property
    def M_ant(self) -> int:
        return self.rows * self.cols

    @property
    def M_rf(self) -> int:
        return self.W_dig.shape[1]

    @property
    def M_ps(self) -> int:
        return 0 if self.analog is None else self.analog.shape[1]

    @property
    def W_ana(self) -> np.ndarray:
        """Dense ``(M_ant, M_rf)`` analog precoder."""
        if self.analog is None:
            return np.eye(self.M_ant, dtype=complex)
        W = np.zeros((self.M_ant, self.M_rf), dtype=complex)
        idx = subarray_indices(self.rows, self.cols, self.sub_rows, self.sub_cols)
        for r in range(self.M_rf):
            W[idx[r], r] = self.analog[r]
        return W

    @property
    def V_ana(self) -> np.ndarray:
        return self.W_ana.conj().T

    @property
    def V_dig(self) -> np.ndarray:
        return np.conj(np.swapaxes(self.W_dig, -1, -2))

    def effective(self, H: np.ndarray) -> np.ndarray:
        """``H W_ana`` for ``H`` of shape ``(N_sc, K, M_ant)``."""
        if self.analog is None:
            return H
        return apply_analog(H, self.analog, self.rows, self.cols, self.sub_rows, self.sub_cols)

    def precoder(self) -> np.ndarray:
        """Combined ``W_ana W_dig[nu]``, shape ``(N_sc, M_ant, K)``."""
        if self.analog is None:
            return self.W_dig
        n, _, K = self.W_dig.shape
        Rr, Rc = self.rows // self.sub_rows, self.cols // self.sub_cols
        blocks = self.analog.reshape(Rr, Rc, self.sub_rows, self.sub_cols)
        wd = self.W_dig.reshape(n, Rr, Rc, K)
        full = np.einsum("abij,nabk->naibjk", blocks, wd)
        return full.reshape(n, self.M_ant, K)

    def combiner(self) -> np.ndarray:
        """Combined ``V_dig[nu] V_ana``, shape ``(N_sc, K, M_ant)``."""
        return np.conj(np.swapaxes(self.precoder(), -1, -2))


def subarray_indices(rows: int, cols: int, sub_rows: int, sub_cols: int) -> np.ndarray:
    """Antenna indices of every subarray, shape ``(M_rf, M_ps)``, subarray-major."""
    grid = np.arange(rows * cols).reshape(rows // sub_rows, sub_rows, cols // sub_cols, sub_cols)
    return grid.transpose(0, 2, 1, 3).reshape(-1, sub_rows * sub_cols)


def _blocks(H: np.ndarray, rows: int, cols: int, sub_rows: int, sub_cols: int) -> np.ndarray:
    n, K, _ = H.shape
    Hr = H.reshape(n, K, rows // sub_rows, sub_rows, cols // sub_cols, sub_cols)
    return Hr.transpose(0, 1, 2, 4, 3, 5)  # (n, K, Rr, Rc, sr, sc)


def apply_analog(H, analog, rows, cols, sub_rows, sub_cols) -> np.ndarray:
    Hb = _blocks(H, rows, cols, sub_rows, sub_cols)
    Rr, Rc = rows // sub_rows, cols // sub_cols
    blocks = analog.reshape(Rr, Rc, sub_rows, sub_cols)
    out = np.einsum("nkabij,abij->nkab", Hb, blocks, optimize=True)
    return out.reshape(H.shape[0], H.shape[1], Rr * Rc)


def beam_metric(H: np.ndarray, rows: int, cols: int, sub_rows: int, sub_cols: int) -> np.ndarray:
    """Wideband sum power ``sum_{nu,k} |h_k,sub(r)[nu]^T w_b|^2`` of every DFT beam.

    Returns ``(M_rf, M_ps)`` indexed by subarray and beam ``b = p*sub_cols + q``.
    """
    Hb = _blocks(H, rows, cols, sub_rows, sub_cols)
    m_ps = sub_rows * sub_cols
    # sum_ij h[i,j] exp(+j2pi(pi/R + qj/C)) = R*C*ifft2(h)[p,q]
    proj = np.fft.ifft2(Hb, axes=(-2, -1)) * np.sqrt(m_ps)
    metric = np.sum(np.abs(proj) ** 2, axis=(0, 1))
    return metric.reshape(-1, m_ps)


def select_analog(H: np.ndarray, rows: int, cols: int, m_rf: int,
                  codebook: Codebook | None = None) -> tuple[np.ndarray, np.ndarray, Codebook]:
    """Pick, per subarray, the codebook beam with the largest wideband sum power.

    Returns the analog weights ``(M_rf, M_ps)``, the chosen beam indices and the
    codebook used.
    """
    m_ant = rows * cols
    if m_ant % m_rf:
        raise ValueError("M_rf does not divide M_ant")
    sub_rows, sub_cols = subarray_shape(rows, cols, m_ant // m_rf)
    if codebook is None:
        codebook = dft_codebook(sub_rows, sub_cols)
    if codebook.size == 0:
        raise ValueError("empty codebook")
    if (codebook.rows, codebook.cols) == (sub_rows, sub_cols) and codebook.size == sub_rows * sub_cols:
        metric = beam_metric(H, rows, cols, sub_rows, sub_cols)
    else:
        Hb = _blocks(H, rows, cols, sub_rows, sub_cols).reshape(*H.shape[:2], m_rf, -1)
        metric = np.sum(np.abs(Hb @ codebook.beams) ** 2, axis=(0, 1))
    best = np.argmax(metric, axis=1)
    return codebook.beams[:, best].T.copy(), best, codebook


def zf_digital(H_eff: np.ndarray, normalize: bool = True) -> np.ndarray:
    """Right pseudo-inverse ``H_eff^H (H_eff H_eff^H)^-1`` per subcarrier.

    ``H_eff`` has shape ``(N_sc, K, M_rf)`` (a single ``(K, M_rf)`` matrix is
    also accepted). With ``normalize`` each subcarrier's precoder is scaled to
    unit Frobenius norm; the analog columns are orthonormal, so this equals the
    joint ``||W_ana W_dig||_F = 1`` scaling.
    """
    H_eff = np.asarray(H_eff)
    single = H_eff.ndim == 2
    if single:
        H_eff = H_eff[None]
    gram = H_eff @ np.conj(np.swapaxes(H_eff, -1, -2))
    eig = np.linalg.eigvalsh(gram)
    if np.any(eig[:, 0] <= RANK_TOL * eig[:, -1]):
        raise DegenerateChannelError("effective channel is rank deficient")
    W = np.conj(np.swapaxes(np.linalg.solve(gram, H_eff), -1, -2))
    if normalize:
        W = W / np.linalg.norm(W, axis=(-2, -1), keepdims=True)
    return W[0] if single else W


def build(H: np.ndarray, rows: int, cols: int, m_rf: int, fully_digital: bool = False,
          codebook: Codebook | None = None) -> BeamformerSet:
    """Analog selection followed by per-subcarrier ZF for one drop."""
    if fully_digital:
        if m_rf != rows * cols:
            raise ValueError("fully-digital beamforming requires M_rf == M_ant")
        return BeamformerSet(rows, cols, 1, 1, zf_digital(H), None)
    analog, beams, cb = select_analog(H, rows, cols, m_rf, codebook)
    bf = BeamformerSet(rows, cols, cb.rows, cb.cols, np.empty((0, m_rf, 0), complex), analog, beams)
    bf.W_dig = zf_digital(bf.effective(H))
    return bf


def build_for(H: np.ndarray, config) -> BeamformerSet:
    """:func:`build` with array size, RF chains and mode taken from a scenario."""
    return build(H, config.M_ant_rows, config.M_ant_cols, config.M_rf, config.fully_digital)
