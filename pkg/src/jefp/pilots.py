"""Trainable pilot book and the downlink pilot transmission pass.

The pilot book stores raw complex symbols per (pilot subcarrier, transmit
antenna, OFDM symbol) and applies a differentiable per-symbol power
projection on every read, so the transmit power constraint holds exactly
at every training step instead of being enforced by post-hoc clamping.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn


def pilot_subcarrier_indices(n_subcarriers: int, spacing: int) -> np.ndarray:
    """Equally spaced pilot positions m*spacing for m = 0..floor(Nc/g)-1."""
    if spacing < 1:
        raise ValueError("pilot spacing must be >= 1")
    m = n_subcarriers // spacing
    if m < 1:
        raise ValueError("pilot spacing leaves no pilot subcarriers")
    return np.arange(m) * spacing


def project_pilot_power(p_raw: torch.Tensor) -> torch.Tensor:
    """Scale each OFDM symbol slice of a [M, Nt, L] pilot tensor so that
    the mean per-pilot-subcarrier energy is exactly one. Differentiable."""
    m = p_raw.shape[0]
    energy = (p_raw.real ** 2 + p_raw.imag ** 2).sum(dim=(0, 1))  # [L]
    if bool((energy == 0).any()):
        raise ValueError("degenerate pilot symbol: all-zero OFDM symbol slice")
    return p_raw * torch.sqrt(m / energy)


class PilotBook(nn.Module):
    """Pilot symbols shared by all users, power-projected on the fly.

    The raw parameter is stored as real pairs [M, Nt, L, 2]; ``forward``
    returns the projected complex tensor [M, Nt, L].
    """

    def __init__(self, n_pilots: int, n_tx: int, n_symbols: int, spacing: int,
                 trainable: bool = True, init: torch.Tensor | None = None,
                 dtype: torch.dtype = torch.float32):
        super().__init__()
        self.n_pilots = n_pilots
        self.n_tx = n_tx
        self.n_symbols = n_symbols
        self.spacing = spacing
        if init is None:
            raw = torch.randn(n_pilots, n_tx, n_symbols, 2, dtype=dtype) / np.sqrt(2.0)
        else:
            if init.shape != (n_pilots, n_tx, n_symbols):
                raise ValueError(f"init shape {tuple(init.shape)} != "
                                 f"{(n_pilots, n_tx, n_symbols)}")
            raw = torch.view_as_real(init).to(dtype).clone()
        if trainable:
            self.raw = nn.Parameter(raw)
        else:
            self.register_buffer("raw", raw)

    @classmethod
    def from_values(cls, values: torch.Tensor, spacing: int,
                    trainable: bool = False) -> "PilotBook":
        m, nt, l = values.shape
        return cls(m, nt, l, spacing, trainable=trainable, init=values,
                   dtype=values.real.dtype)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n_pilots) * self.spacing

    def forward(self) -> torch.Tensor:
        return project_pilot_power(torch.view_as_complex(self.raw))


def dft_pilotbook(n_pilots: int, n_tx: int, n_symbols: int, spacing: int,
                  dtype: torch.dtype = torch.float32) -> PilotBook:
    """Fixed orthogonal pilot book built from DFT columns over antennas.

    OFDM symbol l transmits column (l mod Nt) of the Nt-point DFT matrix
    on every pilot subcarrier; columns cycle when L exceeds Nt.
    """
    ant = np.arange(n_tx)
    cols = np.stack([np.exp(-2j * np.pi * ant * (l % n_tx) / n_tx)
                     for l in range(n_symbols)], axis=-1)  # [Nt, L]
    values = np.broadcast_to(cols, (n_pilots, n_tx, n_symbols))
    cdtype = torch.complex128 if dtype == torch.float64 else torch.complex64
    return PilotBook.from_values(torch.as_tensor(values.copy(), dtype=cdtype),
                                 spacing, trainable=False)


def complex_normal_like(shape, sigma_sq: float, dtype, seed: int | None = None,
                        device=None) -> torch.Tensor:
    """Circularly symmetric complex Gaussian with per-entry variance sigma_sq."""
    gen = None
    if seed is not None:
        gen = torch.Generator(device=device or "cpu")
        gen.manual_seed(int(seed) & 0x7FFFFFFFFFFFFFFF)
    rdtype = torch.float64 if dtype in (torch.complex128, torch.float64) else torch.float32
    re = torch.randn(*shape, generator=gen, dtype=rdtype, device=device)
    im = torch.randn(*shape, generator=gen, dtype=rdtype, device=device)
    return (re + 1j * im) * np.sqrt(sigma_sq / 2.0)


def downlink_pilot_pass(h_down: torch.Tensor, pilots: PilotBook,
                        sigma_ce_sq: float, seed: int | None = None) -> torch.Tensor:
    """Received pilot tensor Y[..., m, l] = h(idx_m)^T p_m^(l) + noise.

    ``h_down`` is complex [..., Nc, Nt]; the return is complex [..., M, L].
    Differentiable with respect to both the channel and the pilot book.
    """
    p = pilots()
    idx = torch.as_tensor(pilots.indices, device=h_down.device)
    if int(idx[-1]) >= h_down.shape[-2]:
        raise ValueError("pilot indices exceed subcarrier count")
    h_at_pilots = h_down.index_select(-2, idx)  # [..., M, Nt]
    y = torch.einsum("...ma,mal->...ml", h_at_pilots, p)
    if sigma_ce_sq > 0:
        y = y + complex_normal_like(y.shape, sigma_ce_sq, y.dtype, seed=seed,
                                    device=y.device)
    return y


def received_to_real(y: torch.Tensor) -> torch.Tensor:
    """View a complex [..., M, L] tensor as network input [..., M, L, 2]."""
    return torch.view_as_real(y)


def ls_oracle_estimate(y, pilots) -> np.ndarray:
    """Minimum-norm least-squares channel estimate per pilot subcarrier.

    Solves min_h ||y[m, :] - h^T P_m|| for each pilot subcarrier and
    returns the stacked [M, Nt] estimate. Used as an independent reference
    for the linear pilot model; rank deficiency falls back to the
    minimum-norm solution without error.
    """
    p = pilots() if isinstance(pilots, PilotBook) else pilots
    p = p.detach().cpu().numpy() if torch.is_tensor(p) else np.asarray(p)
    y = y.detach().cpu().numpy() if torch.is_tensor(y) else np.asarray(y)
    m, n_tx, _ = p.shape
    est = np.empty((m, n_tx), dtype=complex)
    for i in range(m):
        # y[i] (L,) = P_i^T (L, Nt) @ h (Nt,)
        est[i], *_ = np.linalg.lstsq(p[i].T, y[i], rcond=None)
    return est
