"""Bogoliubov blocks: junction coefficients, free evolution, composition.

A block ``(alpha, beta)`` expresses the mode functions after a transformation
in terms of the ones before it::

    phi_new_k = sum_n alpha_kn phi_old_n + beta_kn conj(phi_old_n)

truncated to the lowest ``n_max`` modes.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .cache import CoefficientCache
from .modes import (
    DEFAULT_QUAD_TOL,
    CavityGeometry,
    check_mode,
    kg_gram,
    minkowski_frequencies,
    minkowski_slice_modes,
    rindler_frequencies,
    rindler_slice_modes,
)

log = logging.getLogger(__name__)

DEFAULT_NMAX = 40
UNITARITY_TOL = 1e-6
EXTRACTION_H0 = 4e-4


class BogoliubovError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class BogoliubovBlock:
    alpha: np.ndarray
    beta: np.ndarray
    provenance: str = "composed"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.alpha.shape != self.beta.shape or self.alpha.ndim != 2:
            raise ValueError("alpha and beta must be square matrices of equal shape")
        if self.alpha.shape[0] != self.alpha.shape[1]:
            raise ValueError("alpha and beta must be square")

    @property
    def n_max(self) -> int:
        return self.alpha.shape[0]

    @property
    def unitarity_defect(self) -> float:
        """Largest |sum_n (|alpha_kn|^2 - |beta_kn|^2) - 1| over rows k <= n_max/2."""
        rows = max(1, self.n_max // 2)
        a, b = self.alpha[:rows], self.beta[:rows]
        norms = np.sum(np.abs(a) ** 2 - np.abs(b) ** 2, axis=1)
        return float(np.max(np.abs(norms - 1.0)))


@dataclass(frozen=True, eq=False)
class FirstOrderCoeffs:
    """Per-unit-h first-order coefficients, alpha = I + h*alpha1, beta = h*beta1."""

    alpha1: np.ndarray
    beta1: np.ndarray
    extraction_error: np.ndarray
    h0: float

    @property
    def n_max(self) -> int:
        return self.alpha1.shape[0]

    @property
    def diagonal_residue(self) -> float:
        return float(np.max(np.abs(np.diag(self.alpha1))))


def identity_block(n_max: int) -> BogoliubovBlock:
    return BogoliubovBlock(
        np.eye(n_max, dtype=complex), np.zeros((n_max, n_max), dtype=complex), "identity"
    )


def _oracle_matrices(g: CavityGeometry, n_max: int, tol: float) -> tuple[np.ndarray, np.ndarray]:
    ks = np.arange(1, n_max + 1)
    rindler = rindler_slice_modes(ks, g, tol=tol)
    mink = minkowski_slice_modes(ks, g)
    alpha = kg_gram(rindler, mink, g, tol=tol)
    beta = -kg_gram(rindler, mink.conj(), g, tol=tol)
    return alpha, beta


@lru_cache(maxsize=32)
def _oracle_cached(g: CavityGeometry, n_max: int, tol: float, cache_dir: str | None):
    """In-process memo in front of the optional on-disk cache."""
    key = {"L": g.L, "h": g.h, "n_max": n_max, "quad_tol": tol}
    disk = None if cache_dir is None else CoefficientCache(cache_dir)
    hit = disk.load(key) if disk is not None else None
    if hit is not None:
        alpha, beta = hit
    else:
        alpha, beta = _oracle_matrices(g, n_max, tol)
        if disk is not None:
            disk.store(key, alpha, beta)
    alpha.flags.writeable = False
    beta.flags.writeable = False
    return alpha, beta


def junction_coefficients_oracle(
    g: CavityGeometry,
    n_max: int = DEFAULT_NMAX,
    *,
    tol: float = DEFAULT_QUAD_TOL,
    cache=None,
    unitarity_tol: float = UNITARITY_TOL,
) -> BogoliubovBlock:
    """Inertial -> accelerated junction from Klein-Gordon products on t = 0.

    alpha_kn = (phi^R_k, phi^M_n) and beta_kn = -(phi^R_k, conj(phi^M_n)).
    ``cache`` is an optional :class:`~relcavity.cache.CoefficientCache`.
    """
    if g.mass != 0 or g.h <= 0:
        # let the mode layer produce the precise error
        rindler_frequencies([1], g)
    alpha, beta = _oracle_cached(g, n_max, tol, None if cache is None else str(cache.directory))
    block = BogoliubovBlock(np.array(alpha), np.array(beta), "oracle", {"h": g.h, "L": g.L})
    defect = block.unitarity_defect
    block.meta["unitarity_defect"] = defect
    if defect > unitarity_tol:
        raise BogoliubovError(
            f"junction block at h={g.h} violates truncated unitarity: defect {defect:.3e}"
        )
    return block


def parity_matrix(n_max: int) -> np.ndarray:
    """(-1)^(k+n) sign pattern; mirrors a block to the opposite acceleration."""
    k = np.arange(1, n_max + 1)
    return np.where((k[:, None] + k[None, :]) % 2 == 0, 1.0, -1.0)


def junction_block(
    L: float,
    h_signed: float,
    n_max: int = DEFAULT_NMAX,
    *,
    tol: float = DEFAULT_QUAD_TOL,
    cache=None,
) -> BogoliubovBlock:
    """Junction for acceleration h_signed; negative means towards -x.

    Mirroring x -> -x maps mode k to (-1)^(k+1) times itself, so the block for
    -h is the block for +h with entries multiplied by (-1)^(k+n).
    """
    block = junction_coefficients_oracle(CavityGeometry(L, abs(h_signed)), n_max, tol=tol, cache=cache)
    if h_signed >= 0:
        return block
    p = parity_matrix(n_max)
    return BogoliubovBlock(block.alpha * p, block.beta * p, "oracle", dict(block.meta, h=h_signed))


def first_order_coefficients(
    g: CavityGeometry,
    n_max: int = DEFAULT_NMAX,
    *,
    h0: float | None = None,
    tol: float = DEFAULT_QUAD_TOL,
    cache=None,
    instability_tol: float = 1e-6,
) -> FirstOrderCoeffs:
    """Extract alpha1, beta1 by Richardson extrapolation of the oracle.

    With D(h) = (block(h) - identity) / h, the combination
    (8 D(h0/4) - 6 D(h0/2) + D(h0)) / 3 cancels the h and h^2 terms of D.
    Repeating it one level down (h0/8) gives a per-entry error estimate;
    entries whose estimate exceeds ``instability_tol`` are reported through
    a warning. The default h0 shrinks with n_max because the truncation
    error of the extrapolation grows like k^4 with the mode number k.
    """
    if h0 is None:
        h0 = EXTRACTION_H0 * min(1.0, (DEFAULT_NMAX / n_max) ** (4 / 3))
    if g.mass != 0:
        rindler_frequencies([1], g)
    eye = np.eye(n_max)

    def slopes(h):
        b = junction_coefficients_oracle(CavityGeometry(g.L, h), n_max, tol=tol, cache=cache)
        return (b.alpha - eye) / h, b.beta / h

    levels = [slopes(h0 / 2**j) for j in range(4)]

    def extrapolate(d1, d2, d4):
        return (8 * d4 - 6 * d2 + d1) / 3

    alpha1 = extrapolate(*(lv[0] for lv in levels[:3]))
    beta1 = extrapolate(*(lv[1] for lv in levels[:3]))
    err = np.maximum(
        np.abs(extrapolate(*(lv[0] for lv in levels[1:])) - alpha1),
        np.abs(extrapolate(*(lv[1] for lv in levels[1:])) - beta1),
    )
    bad = np.argwhere(err > instability_tol)
    if len(bad):
        warnings.warn(
            f"first-order extraction unstable at {len(bad)} entries, e.g. (k, n)={tuple(bad[0] + 1)} "
            f"error {err[tuple(bad[0])]:.2e}",
            RuntimeWarning,
            stacklevel=2,
        )
    coeffs = FirstOrderCoeffs(alpha1, beta1, err, h0)
    if coeffs.diagonal_residue > 1e-8:
        warnings.warn(
            f"first-order alpha has a diagonal residue {coeffs.diagonal_residue:.2e}",
            RuntimeWarning,
            stacklevel=2,
        )
    return coeffs


def perturbative_block(coeffs: FirstOrderCoeffs, h_signed: float) -> BogoliubovBlock:
    return BogoliubovBlock(
        np.eye(coeffs.n_max) + h_signed * coeffs.alpha1,
        h_signed * coeffs.beta1,
        "perturbative",
        {"h": h_signed},
    )


def massless_beta_modulus(k, kp) -> float:
    """sqrt(k k') (1 - (-1)^(k-k')) / (pi^2 (k + k')^3), the |beta1| of the massless field."""
    k, kp = check_mode(k), check_mode(kp)
    return math.sqrt(k * kp) * (1 - (-1) ** (k - kp)) / (math.pi**2 * (k + kp) ** 3)


def compose(first: BogoliubovBlock, second: BogoliubovBlock) -> BogoliubovBlock:
    """Block of the transformation that applies ``first`` and then ``second``."""
    if first.n_max != second.n_max:
        raise ValueError(f"cannot compose blocks of size {first.n_max} and {second.n_max}")
    a1, b1, a2, b2 = first.alpha, first.beta, second.alpha, second.beta
    return BogoliubovBlock(a2 @ a1 + b2 @ b1.conj(), a2 @ b1 + b2 @ a1.conj(), "composed")


def compose_all(*blocks: BogoliubovBlock) -> BogoliubovBlock:
    out = blocks[0]
    for b in blocks[1:]:
        out = compose(out, b)
    return out


def invert(b: BogoliubovBlock, *, unitarity_tol: float = UNITARITY_TOL) -> BogoliubovBlock:
    defect = b.unitarity_defect
    if defect > unitarity_tol:
        raise BogoliubovError(f"block is too far from unitary to invert (defect {defect:.3e})")
    return BogoliubovBlock(b.alpha.conj().T, -b.beta.T, b.provenance, dict(b.meta, inverted=True))


def free_evolution_block(
    g: CavityGeometry, duration: float, chart: str = "inertial", n_max: int = DEFAULT_NMAX
) -> BogoliubovBlock:
    """Phase rotation e^{-i theta_k}, theta = omega t (inertial) or Omega tau (accelerated)."""
    if duration < 0:
        raise ValueError(f"duration must be non-negative, got {duration}")
    ks = np.arange(1, n_max + 1)
    if chart == "inertial":
        freqs = minkowski_frequencies(ks, g)
    elif chart == "accelerated":
        freqs = rindler_frequencies(ks, g)
    else:
        raise ValueError(f"chart must be 'inertial' or 'accelerated', got {chart!r}")
    return BogoliubovBlock(
        np.diag(np.exp(-1j * freqs * duration)),
        np.zeros((n_max, n_max), dtype=complex),
        "free",
        {"chart": chart, "duration": duration},
    )


def mean_excitations(b: BogoliubovBlock, k) -> float:
    """Mean quanta in mode k after acting on the vacuum: sum_n |beta_kn|^2."""
    k = check_mode(k)
    if k > b.n_max:
        raise ValueError(f"mode {k} exceeds truncation n_max={b.n_max}")
    return float(np.sum(np.abs(b.beta[k - 1]) ** 2))
