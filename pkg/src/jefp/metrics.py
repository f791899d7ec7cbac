"""Spectral-efficiency objective, NMSE, and parameter accounting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

NMSE_FLOOR_DB = -300.0


@dataclass(frozen=True)
class SNRConfig:
    """Per-phase SNRs in dB and the noise powers they imply.

    With unit-mean-power channels and the pilot/latent power constraints,
    the pilot and uplink noise variances are 10^(-snr/10); the downlink
    data-phase variance additionally scales with the transmit power budget.
    """

    snr_ce_db: float = 10.0
    snr_u_db: float = 10.0
    snr_d_db: float = 10.0
    power: float = 1.0

    def __post_init__(self):
        if not np.isfinite([self.snr_ce_db, self.snr_u_db, self.snr_d_db]).all():
            raise ValueError("SNRs must be finite")
        if self.power <= 0:
            raise ValueError("power must be positive")

    @property
    def sigma_ce_sq(self) -> float:
        return 10.0 ** (-self.snr_ce_db / 10.0)

    @property
    def sigma_u_sq(self) -> float:
        return 10.0 ** (-self.snr_u_db / 10.0)

    @property
    def sigma_d_sq(self) -> float:
        return self.power * 10.0 ** (-self.snr_d_db / 10.0)


def sum_rate(h_down: torch.Tensor, precoding: torch.Tensor, mask: torch.Tensor,
             sigma_d_sq: float) -> torch.Tensor:
    """Masked downlink sum spectral efficiency, differentiable.

    ``h_down`` and ``precoding`` are complex [..., k_max, n_sc, n_tx];
    ``mask`` is [..., k_max] with 1 for active users. For each active user
    and subcarrier the SINR uses the transpose (unconjugated) channel-
    precoder product, with interference summed over the other active
    users. Returns the rate summed over users and subcarriers, per batch
    element.
    """
    if mask.dim() == 1:
        mask = mask.expand(h_down.shape[:-3] + mask.shape)
    maskf = mask.to(h_down.real.dtype)
    # gains[..., k, m, n] = h_k(n)^T v_m(n)
    gains = torch.einsum("...kna,...mna->...kmn", h_down, precoding)
    p = gains.real ** 2 + gains.imag ** 2
    signal = torch.einsum("...kkn->...kn", p)
    total = torch.einsum("...kmn,...m->...kn", p, maskf)
    interference = total - signal * maskf[..., :, None]
    sinr = signal / (interference + sigma_d_sq)
    rate = torch.log2(1.0 + sinr) * maskf[..., :, None]
    return rate.sum(dim=(-2, -1))


def spectral_efficiency(h_down, precoding, mask, sigma_d_sq) -> tuple[float, float]:
    """Sum rate of one instance: (total over subcarriers, per-subcarrier).

    Accepts numpy arrays or torch tensors shaped [k_max, n_sc, n_tx]
    (channels, precoders) and [k_max] (mask).
    """
    h = torch.as_tensor(np.asarray(h_down), dtype=torch.complex128) \
        if not torch.is_tensor(h_down) else h_down
    v = torch.as_tensor(np.asarray(precoding), dtype=torch.complex128) \
        if not torch.is_tensor(precoding) else precoding
    m = torch.as_tensor(np.asarray(mask, dtype=float)) if not torch.is_tensor(mask) else mask
    total = sum_rate(h, v, m, float(sigma_d_sq))
    total_f = float(total)
    return total_f, total_f / h.shape[-2]


def nmse(h_ref, h_est) -> float:
    """Normalized mean squared error in dB, floored at -300 dB."""
    ref = np.asarray(h_ref)
    est = np.asarray(h_est)
    if ref.shape != est.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {est.shape}")
    ref_energy = np.sum(np.abs(ref) ** 2)
    if ref_energy == 0:
        raise ValueError("zero reference tensor")
    err = np.sum(np.abs(ref - est) ** 2)
    if err == 0:
        return NMSE_FLOOR_DB
    return float(max(10.0 * np.log10(err / ref_energy), NMSE_FLOOR_DB))


def count_parameters(params) -> int:
    """Total trainable scalar parameters of a module, mapping, or tensor list."""
    if isinstance(params, torch.nn.Module):
        return sum(p.numel() for p in params.parameters() if p.requires_grad)
    if isinstance(params, dict):
        return sum(count_parameters(v) for v in params.values())
    if torch.is_tensor(params):
        return params.numel() if params.requires_grad else 0
    return sum(count_parameters(p) for p in params)


def parameter_breakdown(module: torch.nn.Module) -> dict[str, int]:
    """Per-child trainable parameter counts; direct parameters under '(own)'."""
    out: dict[str, int] = {}
    own = sum(p.numel() for p in module.parameters(recurse=False) if p.requires_grad)
    if own:
        out["(own)"] = own
    for name, child in module.named_children():
        n = count_parameters(child)
        if n:
            out[name] = n
    return out
