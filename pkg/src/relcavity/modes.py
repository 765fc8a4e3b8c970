"""Cavity geometry and the massless field modes in inertial and accelerated frames.

Units: c = hbar = 1. Minkowski time ``t`` is used during coasting and the
proper time ``tau`` at the cavity centre during uniform acceleration.

Functions evaluated on the junction slice t = tau = 0 are parametrized by the
offset ``xi = x - x_A`` from the left wall rather than the absolute position,
because for small accelerations the walls sit at x ~ L/h and subtracting the
wall position would throw away most of the significant digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .quadrature import converge

DEFAULT_QUAD_TOL = 1e-12


class OutOfScopeError(ValueError):
    """Requested physics that this package deliberately does not model."""


@dataclass(frozen=True)
class CavityGeometry:
    """Rigid cavity of proper length ``L`` with acceleration parameter ``h = aL``.

    The walls sit at ``x_A = 1/a - L/2`` and ``x_B = 1/a + L/2`` so that
    ``a = 2 / (x_A + x_B)`` is the proper acceleration of the centre.
    ``h = 0`` describes an inertial cavity; its wall positions are infinite.
    """

    L: float
    h: float = 0.0
    mass: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValueError(f"cavity length must be positive, got L={self.L}")
        if not (0.0 <= self.h < 2.0):
            raise ValueError(f"acceleration parameter must satisfy 0 <= h < 2, got h={self.h}")
        if not (math.isfinite(self.mass) and self.mass >= 0):
            raise ValueError(f"mass must be non-negative, got {self.mass}")

    @classmethod
    def from_walls(cls, x_A: float, x_B: float, mass: float = 0.0) -> "CavityGeometry":
        if not 0 < x_A < x_B:
            raise ValueError(f"walls must satisfy 0 < x_A < x_B, got {x_A}, {x_B}")
        L = x_B - x_A
        return cls(L=L, h=2.0 * L / (x_A + x_B), mass=mass)

    @property
    def a(self) -> float:
        return self.h / self.L

    @property
    def x_A(self) -> float:
        return math.inf if self.h == 0 else 1.0 / self.a - 0.5 * self.L

    @property
    def x_B(self) -> float:
        return math.inf if self.h == 0 else 1.0 / self.a + 0.5 * self.L

    @property
    def log_wall_ratio(self) -> float:
        """ln(x_B / x_A), evaluated without cancellation."""
        return math.log1p(self.h / (1.0 - 0.5 * self.h))

    def with_h(self, h: float) -> "CavityGeometry":
        return replace(self, h=h)


@dataclass(frozen=True)
class SpacetimePoint:
    """A point given by (time, space) in whichever chart the caller is using."""

    time: float
    space: float


def check_mode(k) -> int:
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise ValueError(f"mode index must be a positive integer, got {k!r}")
    return int(k)


def _require_massless(g: CavityGeometry, what: str):
    if g.mass != 0:
        raise OutOfScopeError(f"{what} is only implemented for the massless field (mass={g.mass})")
    if g.h <= 0:
        raise ValueError(f"{what} needs a uniformly accelerated cavity (h > 0)")


def minkowski_frequency(k, g: CavityGeometry) -> float:
    k = check_mode(k)
    return math.sqrt((k * math.pi / g.L) ** 2 + g.mass**2)


def minkowski_frequencies(ks, g: CavityGeometry) -> np.ndarray:
    ks = np.asarray(ks, dtype=float)
    return np.sqrt((ks * np.pi / g.L) ** 2 + g.mass**2)


def minkowski_mode(k, p: SpacetimePoint, g: CavityGeometry) -> complex:
    """Inertial mode function at point ``p`` = (t, x); x must lie between the walls."""
    k = check_mode(k)
    x = p.space
    if g.h == 0:
        raise ValueError("an inertial-only geometry (h=0) has no absolute wall positions")
    if not g.x_A <= x <= g.x_B:
        raise ValueError(f"x={x} lies outside the cavity [{g.x_A}, {g.x_B}]")
    w = minkowski_frequency(k, g)
    return complex(
        math.sin(k * math.pi * (x - g.x_A) / g.L) / math.sqrt(w * g.L) * np.exp(-1j * w * p.time)
    )


def rindler_frequency(k, g: CavityGeometry) -> float:
    """Frequency conjugate to the centre proper time for the massless field."""
    k = check_mode(k)
    _require_massless(g, "rindler_frequency")
    return k * math.pi * g.a / g.log_wall_ratio


def rindler_frequencies(ks, g: CavityGeometry) -> np.ndarray:
    _require_massless(g, "rindler_frequencies")
    return np.asarray(ks, dtype=float) * math.pi * g.a / g.log_wall_ratio


def _rindler_phase(ks: np.ndarray, xi: np.ndarray, g: CavityGeometry) -> np.ndarray:
    # k pi ln(chi/x_A) / ln(x_B/x_A) with chi = x_A + xi
    scale = g.h / (g.L * (1.0 - 0.5 * g.h))
    u = np.log1p(np.asarray(xi) * scale) / g.log_wall_ratio
    return np.pi * np.outer(ks, u)


def rindler_mode(k, p: SpacetimePoint, g: CavityGeometry, *, tol: float = DEFAULT_QUAD_TOL) -> complex:
    """Accelerated-frame mode at ``p`` = (tau, chi), normalized by quadrature."""
    k = check_mode(k)
    _require_massless(g, "rindler_mode")
    chi = p.space
    if not g.x_A <= chi <= g.x_B:
        raise ValueError(f"chi={chi} lies outside the cavity [{g.x_A}, {g.x_B}]")
    norm = rindler_normalization(g, k, tol=tol)[0]
    phase = _rindler_phase(np.array([k]), np.array([chi - g.x_A]), g)[0, 0]
    return complex(norm * math.sin(phase) * np.exp(-1j * rindler_frequency(k, g) * p.time))


@dataclass(frozen=True)
class SliceModes:
    """A stack of mode functions restricted to the t = 0 junction slice.

    ``value(xi)`` and ``time_derivative(xi)`` map a 1-D array of wall offsets
    to complex arrays of shape (n_modes, len(xi)). The time derivative is
    with respect to Minkowski time t.
    """

    value: Callable[[np.ndarray], np.ndarray]
    time_derivative: Callable[[np.ndarray], np.ndarray]
    labels: tuple[int, ...]

    def conj(self) -> "SliceModes":
        v, d = self.value, self.time_derivative
        return SliceModes(lambda xi: np.conj(v(xi)), lambda xi: np.conj(d(xi)), self.labels)

    def __len__(self):
        return len(self.labels)


def _as_modes(ks) -> np.ndarray:
    ks = np.atleast_1d(np.asarray(ks))
    for k in ks:
        check_mode(k)
    return ks.astype(int)


def minkowski_slice_modes(ks, g: CavityGeometry) -> SliceModes:
    ks = _as_modes(ks)
    w = minkowski_frequencies(ks, g)
    amp = 1.0 / np.sqrt(w * g.L)

    def value(xi):
        return (amp[:, None] * np.sin(np.pi * np.outer(ks, xi) / g.L)).astype(complex)

    def time_derivative(xi):
        return -1j * w[:, None] * value(xi)

    return SliceModes(value, time_derivative, tuple(int(k) for k in ks))


def _rindler_slice_raw(ks: np.ndarray, g: CavityGeometry, norms: np.ndarray) -> SliceModes:
    om = rindler_frequencies(ks, g)

    def value(xi):
        return (norms[:, None] * np.sin(_rindler_phase(ks, xi, g))).astype(complex)

    def time_derivative(xi):
        # d/dt = (1 / (a chi)) d/dtau on the t = 0 slice
        a_chi = 1.0 - 0.5 * g.h + g.h * np.asarray(xi) / g.L
        return -1j * om[:, None] * value(xi) / a_chi[None, :]

    return SliceModes(value, time_derivative, tuple(int(k) for k in ks))


@lru_cache(maxsize=64)
def _rindler_norms(g: CavityGeometry, ks: tuple[int, ...], tol: float) -> np.ndarray:
    arr = np.array(ks)
    raw = _rindler_slice_raw(arr, g, np.ones(len(arr)))
    norms = 1.0 / np.sqrt(np.real(kg_norms(raw, g, tol=tol)))
    norms.flags.writeable = False
    return norms


def rindler_normalization(g: CavityGeometry, ks, *, tol: float = DEFAULT_QUAD_TOL) -> np.ndarray:
    """Normalization constants fixing (phi_k, phi_k) = 1, computed by quadrature.

    The sign is positive, which makes alpha_kk -> +1 as h -> 0.
    """
    _require_massless(g, "rindler_normalization")
    return _rindler_norms(g, tuple(int(k) for k in _as_modes(ks)), tol)


def rindler_slice_modes(ks, g: CavityGeometry, *, tol: float = DEFAULT_QUAD_TOL) -> SliceModes:
    ks = _as_modes(ks)
    return _rindler_slice_raw(ks, g, rindler_normalization(g, ks, tol=tol))


def kg_gram(
    fs: SliceModes, gs: SliceModes, g: CavityGeometry, *, tol: float = DEFAULT_QUAD_TOL
) -> np.ndarray:
    """Matrix of Klein-Gordon products (f_i, g_j) on the t = 0 slice.

    (f, g) = -i * integral over the cavity of (f d_t g* - g* d_t f).
    """

    def estimator(xi, w):
        f, df = fs.value(xi) * w, fs.time_derivative(xi) * w
        gc, dgc = np.conj(gs.value(xi)), np.conj(gs.time_derivative(xi))
        return -1j * (f @ dgc.T - df @ gc.T)

    return converge(estimator, 0.0, g.L, tol=tol).value


def kg_norms(fs: SliceModes, g: CavityGeometry, *, tol: float = DEFAULT_QUAD_TOL) -> np.ndarray:
    """Diagonal (f_i, f_i) only; cheaper than the full Gram matrix."""

    def estimator(xi, w):
        f, df = fs.value(xi), fs.time_derivative(xi)
        return -1j * ((f * np.conj(df) - np.conj(f) * df) @ w)

    return converge(estimator, 0.0, g.L, tol=tol).value


def kg_inner_product(
    f: SliceModes, h: SliceModes, g: CavityGeometry, *, tol: float = DEFAULT_QUAD_TOL
) -> complex:
    """Klein-Gordon product of two single mode functions."""
    if len(f) != 1 or len(h) != 1:
        raise ValueError("kg_inner_product takes single modes; use kg_gram for families")
    return complex(kg_gram(f, h, g, tol=tol)[0, 0])


def gram_defect(fs: SliceModes, g: CavityGeometry, *, tol: float = DEFAULT_QUAD_TOL) -> float:
    """max |(f_i, f_j) - delta_ij| over the family."""
    gram = kg_gram(fs, fs, g, tol=tol)
    return float(np.max(np.abs(gram - np.eye(len(fs)))))

