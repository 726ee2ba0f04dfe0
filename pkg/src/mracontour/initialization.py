"""Approximation coefficients of a periodic curve from its Fourier series.

a_{jk} = 2^{-j/2} sum_m c_m exp(2 pi i m k / 2^j) phihat(-m / 2^j)
for a period-1 curve, with phihat(xi) = prod_{n>=1} H(xi / 2^n).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .contour import FourierContour
from .filters import FilterBank, refinement_mask


class SymmetryError(ArithmeticError):
    pass


@dataclass(frozen=True)
class InitConfig:
    level: int
    product_tol: float = 1e-14
    max_factors: int = 64


def min_level(bank: FilterBank) -> int:
    """Smallest level with 2^(j-1) - 1 < floor(2^j - beta); 1 for the Haar basis."""
    if bank.beta <= 1:
        return 1
    return math.ceil(math.log2(bank.beta - 1) + 1)


def default_j0(bank: FilterBank) -> int:
    """Lowest level j0 with 2^(j0-1) >= p."""
    return int(math.log2(bank.p)) + 1


def phi_hat(bank: FilterBank, xi, product_tol: float = 1e-14, max_factors: int = 64):
    """Truncated infinite product prod_n H(xi/2^n), vectorised over ``xi``.

    A point stops accumulating once |xi/2^n| <= 1/2 and |H(xi/2^n) - 1| <
    product_tol, or after ``max_factors`` factors.  The first condition
    matters because H is 1-periodic: H(n) = 1 at every integer n.
    """
    xi = np.asarray(xi, dtype=float)
    out = np.ones(xi.shape, dtype=complex)
    active = np.ones(xi.shape, dtype=bool)
    for n in range(1, max_factors + 1):
        if not active.any():
            break
        arg = xi[active] / 2.0**n
        f = refinement_mask(bank, arg)
        out[active] *= f
        done = (np.abs(arg) <= 0.5) & (np.abs(f - 1) < product_tol)
        idx = np.flatnonzero(active)
        active.flat[idx[done]] = False
    return out


def init_approx_coeffs(
    fc: FourierContour,
    bank: FilterBank,
    cfg: InitConfig | int,
    k_range: tuple[int, int] | None = None,
    imag_tol: float = 1e-9,
) -> np.ndarray:
    """Level-j approximation coefficients, shape (2, 2^j), for k = -2^(j-1) ... 2^(j-1)-1.

    ``fc`` must have period 1.  ``k_range=(k_lo, k_hi)`` evaluates the formula
    over an arbitrary inclusive index range instead of the central window.
    """
    if isinstance(cfg, int):
        cfg = InitConfig(level=cfg)
    j = cfg.level
    if not cfg.product_tol > 0:
        raise ValueError("product_tol must be positive")
    if j < min_level(bank):
        raise ValueError(
            f"level {j} is below the minimal level {min_level(bank)} for {bank.name}"
        )
    if not math.isclose(fc.period, 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError(f"Fourier contour must have period 1, got {fc.period}")
    if k_range is None:
        k = np.arange(-(2 ** (j - 1)), 2 ** (j - 1))
    else:
        k = np.arange(k_range[0], k_range[1] + 1)
    m, full = fc.full_spectrum()
    weights = phi_hat(bank, -m / 2.0**j, cfg.product_tol, cfg.max_factors)
    phase = np.exp(2j * np.pi * np.multiply.outer(k, m) / 2.0**j)
    a = 2.0 ** (-j / 2) * (phase @ (full * weights).T).T
    residue = float(np.abs(a.imag).max())
    if residue > imag_tol:
        raise SymmetryError(
            f"symmetry violation: imaginary residue {residue:.3e} exceeds {imag_tol:.1e}"
        )
    return a.real.copy()
