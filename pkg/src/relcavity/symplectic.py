"""Covariance-matrix formalism for the cavity modes.

Conventions: quadratures are ordered (x_1, p_1, x_2, p_2, ...), the vacuum
covariance is the identity, and the symplectic form is the direct sum of
J = [[0, 1], [-1, 0]]. A transformation S maps a covariance matrix as
sigma -> S^T sigma S, so the vacuum goes to S^T S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag
from scipy.optimize import least_squares

from .bogoliubov import BogoliubovBlock
from .modes import check_mode

J = np.array([[0.0, 1.0], [-1.0, 0.0]])
SIGMA_Z = np.diag([1.0, -1.0])
PARTIAL_TRANSPOSE = np.diag([1.0, 1.0, 1.0, -1.0])

SYMPLECTIC_TOL = 1e-10
MAX_TRUNCATION_DEFECT = 1e-6


class SymplecticError(ValueError):
    pass


def omega(n_modes: int) -> np.ndarray:
    return block_diag(*([J] * n_modes))


def rotation(theta: float) -> np.ndarray:
    """Phase-space rotation; a mode phase e^{-i theta} maps to this matrix."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def local_rotation(psi_k: float, psi_kp: float) -> np.ndarray:
    return block_diag(rotation(psi_k), rotation(psi_kp))


def two_mode_squeezer(r: float) -> np.ndarray:
    ch, sh = math.cosh(r), math.sinh(r)
    return np.block([[ch * np.eye(2), sh * SIGMA_Z], [sh * SIGMA_Z, ch * np.eye(2)]])


def symplectic_defect(matrix: np.ndarray) -> float:
    """max |S^T Omega S - Omega|."""
    m = np.asarray(matrix)
    w = omega(m.shape[0] // 2)
    return float(np.max(np.abs(m.T @ w @ m - w)))


def renormalize_symplectic(matrix: np.ndarray, *, tol: float = 1e-15, max_iter: int = 50) -> np.ndarray:
    """Nearest-group projection by the Newton iteration X <- (X + Omega^-1 X^-T Omega) / 2.

    This is the generalized polar decomposition for the symplectic group; it
    converges quadratically for matrices close to symplectic and leaves
    symplectic matrices unchanged.
    """
    x = np.array(matrix, dtype=float)
    w = omega(x.shape[0] // 2)
    for _ in range(max_iter):
        nxt = 0.5 * (x + w.T @ np.linalg.inv(x).T @ w)
        step = np.max(np.abs(nxt - x))
        x = nxt
        if step < tol:
            break
    return x


@dataclass(frozen=True, eq=False)
class SymplecticOp:
    matrix: np.ndarray
    modes: tuple[int, ...]
    truncation_defect: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (2 * len(self.modes), 2 * len(self.modes)):
            raise ValueError(f"matrix shape {m.shape} does not match {len(self.modes)} modes")
        object.__setattr__(self, "matrix", m)

    @property
    def defect(self) -> float:
        return symplectic_defect(self.matrix)

    def __matmul__(self, other: "SymplecticOp") -> "SymplecticOp":
        if self.modes != other.modes:
            raise ValueError("mode labels differ")
        return SymplecticOp(self.matrix @ other.matrix, self.modes,
                            self.truncation_defect + other.truncation_defect)


def symplectic_block(a: complex, b: complex) -> np.ndarray:
    """2x2 block for coefficients (A, B):  [[Re(A-B), Im(A+B)], [-Im(A-B), Re(A+B)]]."""
    return np.array([[(a - b).real, (a + b).imag], [-(a - b).imag, (a + b).real]])


def coefficients_from_block(s: np.ndarray) -> tuple[complex, complex]:
    """Invert :func:`symplectic_block`, returning (A, B)."""
    a_minus_b = complex(s[0, 0], -s[1, 0])
    a_plus_b = complex(s[1, 1], s[0, 1])
    return 0.5 * (a_plus_b + a_minus_b), 0.5 * (a_plus_b - a_minus_b)


def symplectic_from_bogoliubov(
    b: BogoliubovBlock,
    modes: Sequence[int],
    *,
    renormalize: bool = True,
    max_defect: float = MAX_TRUNCATION_DEFECT,
) -> SymplecticOp:
    """Real symplectic representation of ``b`` restricted to ``modes``.

    Restricting to a subset of modes breaks exact symplecticity by the weight
    the discarded modes carry. That defect is recorded on the result; with
    ``renormalize`` the matrix is then projected back onto the group.
    """
    modes = tuple(check_mode(k) for k in modes)
    if max(modes) > b.n_max:
        raise ValueError(f"modes {modes} exceed truncation n_max={b.n_max}")
    idx = [k - 1 for k in modes]
    A = b.alpha[np.ix_(idx, idx)]
    B = b.beta[np.ix_(idx, idx)]
    m = len(modes)
    out = np.empty((2 * m, 2 * m))
    for i in range(m):
        for j in range(m):
            out[2 * i:2 * i + 2, 2 * j:2 * j + 2] = symplectic_block(A[i, j], B[i, j])
    defect = symplectic_defect(out)
    if defect > max_defect:
        raise SymplecticError(
            f"restriction to modes {modes} has symplectic defect {defect:.3e} > {max_defect:.1e}; "
            "increase n_max or reduce h"
        )
    if renormalize and defect > 0:
        out = renormalize_symplectic(out)
    return SymplecticOp(out, modes, defect)


def repeat(S: SymplecticOp, N: int) -> SymplecticOp:
    """S^N by repeated multiplication."""
    if int(N) != N or N < 1:
        raise ValueError(f"repetitions must be an integer >= 1, got {N}")
    out = S.matrix
    for _ in range(int(N) - 1):
        out = S.matrix @ out
    return SymplecticOp(out, S.modes, N * S.truncation_defect)


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    matrix: np.ndarray
    modes: tuple[int, ...]

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (2 * len(self.modes), 2 * len(self.modes)):
            raise ValueError(f"matrix shape {m.shape} does not match {len(self.modes)} modes")
        if np.max(np.abs(m - m.T)) > 1e-12 * max(1.0, np.max(np.abs(m))):
            raise ValueError("covariance matrix is not symmetric")
        object.__setattr__(self, "matrix", 0.5 * (m + m.T))

    def is_physical(self, tol: float = 1e-10) -> bool:
        """Bona fide check sigma + i Omega >= 0."""
        w = omega(len(self.modes))
        return bool(np.min(np.linalg.eigvalsh(self.matrix + 1j * w)) >= -tol)

    def marginal(self, modes: Sequence[int]) -> "CovarianceMatrix":
        pos = [self.modes.index(k) for k in modes]
        idx = [2 * p + q for p in pos for q in (0, 1)]
        return CovarianceMatrix(self.matrix[np.ix_(idx, idx)], tuple(modes))


def evolve_vacuum(S: SymplecticOp) -> CovarianceMatrix:
    return CovarianceMatrix(S.matrix.T @ S.matrix, S.modes)


def reduce_two_mode(S: SymplecticOp, N: int = 1) -> CovarianceMatrix:
    """sigma_N = (S^N)^T S^N for the two-mode transformation S."""
    if len(S.modes) != 2:
        raise ValueError("reduce_two_mode expects a two-mode transformation")
    return evolve_vacuum(repeat(S, N))


def exact_marginal(full: SymplecticOp, modes: Sequence[int]) -> CovarianceMatrix:
    """Two-mode marginal of the vacuum evolved on the whole truncated space."""
    return evolve_vacuum(full).marginal(modes)


def _as_array(sigma) -> np.ndarray:
    return np.asarray(sigma.matrix if isinstance(sigma, CovarianceMatrix) else sigma, dtype=float)


def partial_transpose(sigma) -> np.ndarray:
    """P sigma P with P = diag(1, 1, 1, -1): flips the momentum of the second mode."""
    m = _as_array(sigma)
    if m.shape != (4, 4):
        raise ValueError("partial_transpose expects a two-mode (4x4) covariance matrix")
    return PARTIAL_TRANSPOSE @ m @ PARTIAL_TRANSPOSE


def symplectic_eigenvalues(sigma, *, pairing_tol: float = 1e-8) -> np.ndarray:
    """Moduli of the +-nu eigenvalue pairs of i Omega sigma, ascending."""
    m = _as_array(sigma)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ValueError(f"expected a 2M x 2M matrix, got shape {m.shape}")
    ev = np.linalg.eigvals(1j * omega(m.shape[0] // 2) @ m)
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.max(np.abs(ev.imag)) > pairing_tol * scale:
        raise np.linalg.LinAlgError(
            f"i Omega sigma has complex eigenvalues (residue {np.max(np.abs(ev.imag)):.2e})"
        )
    vals = np.sort(ev.real)
    n = len(vals) // 2
    neg, pos = -vals[:n][::-1], vals[n:]
    if np.max(np.abs(neg - pos)) > pairing_tol * scale:
        raise np.linalg.LinAlgError("symplectic spectrum is not paired")
    return pos


def two_mode_symplectic_eigenvalues(sigma) -> np.ndarray:
    """Closed form from det(sigma) and det A + det B + 2 det C."""
    m = _as_array(sigma)
    A, B, C = m[:2, :2], m[2:, 2:], m[:2, 2:]
    delta = np.linalg.det(A) + np.linalg.det(B) + 2 * np.linalg.det(C)
    det = np.linalg.det(m)
    disc = math.sqrt(max(delta * delta - 4 * det, 0.0))
    lo = (delta - disc) / 2
    return np.sqrt(np.array([max(lo, 0.0), (delta + disc) / 2]))


def smallest_pt_eigenvalue(sigma) -> float:
    return float(symplectic_eigenvalues(partial_transpose(sigma))[0])


def log_negativity_from_nu(nu: float) -> float:
    return max(0.0, -math.log(nu))


def log_negativity(sigma) -> float:
    """max(0, -ln nu~) with natural logarithm."""
    return log_negativity_from_nu(smallest_pt_eigenvalue(sigma))


@dataclass(frozen=True)
class SqueezerFit:
    r: float
    psi_k: float
    psi_kp: float
    residual: float

    def matrix(self) -> np.ndarray:
        return two_mode_squeezer(self.r) @ local_rotation(self.psi_k, self.psi_kp)


def _drot(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[-s, -c], [c, -s]])


def _zr_and_jacobian(params):
    r, pk, pl = params
    ch, sh = math.cosh(r), math.sinh(r)
    Rk, Rl, dRk, dRl = rotation(pk), rotation(pl), _drot(pk), _drot(pl)
    Z2 = np.zeros((2, 2))
    value = np.block([[ch * Rk, sh * SIGMA_Z @ Rl], [sh * SIGMA_Z @ Rk, ch * Rl]])
    d_r = np.block([[sh * Rk, ch * SIGMA_Z @ Rl], [ch * SIGMA_Z @ Rk, sh * Rl]])
    d_k = np.block([[ch * dRk, Z2], [sh * SIGMA_Z @ dRk, Z2]])
    d_l = np.block([[Z2, sh * SIGMA_Z @ dRl], [Z2, ch * dRl]])
    return value, np.stack([d_r.ravel(), d_k.ravel(), d_l.ravel()], axis=1)


def squeezer_decompose(S) -> SqueezerFit:
    """Least-squares fit of S to Z(r) (R(psi_k) + R(psi_k')).

    Returns the parameters and the Frobenius residual |S - Z R|. The start
    point is read off the blocks (rotation angles from the diagonal blocks,
    sinh r from the sigma_z component of the off-diagonal ones).
    """
    m = np.asarray(S.matrix if isinstance(S, SymplecticOp) else S, dtype=float)
    if m.shape != (4, 4):
        raise ValueError("squeezer_decompose expects a 4x4 two-mode transformation")
    pk = math.atan2(m[1, 0] - m[0, 1], m[0, 0] + m[1, 1])
    pl = math.atan2(m[3, 2] - m[2, 3], m[2, 2] + m[3, 3])
    sh = 0.25 * (np.trace(SIGMA_Z @ m[:2, 2:] @ rotation(pl).T) + np.trace(SIGMA_Z @ m[2:, :2] @ rotation(pk).T))
    x0 = np.array([math.asinh(sh), pk, pl])

    def fun(p):
        return _zr_and_jacobian(p)[0].ravel() - m.ravel()

    def jac(p):
        return _zr_and_jacobian(p)[1]

    sol = least_squares(fun, x0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    r, pk, pl = sol.x
    wrap = lambda a: (a + math.pi) % (2 * math.pi) - math.pi  # noqa: E731
    residual = float(np.linalg.norm(fun(sol.x)))
    return SqueezerFit(float(r), wrap(pk), wrap(pl), residual)


@dataclass
class EntanglementReport:
    nu_tilde: float
    log_negativity: float
    squeezing_r: float
    angles: tuple[float, float]
    mean_excitations: tuple[float, float]
    beta_modulus: float = float("nan")
    squeezer_residual: float = float("nan")
    extras: dict = field(default_factory=dict)

    @property
    def nu_tilde_first_order(self) -> float:
        return 1.0 - self.nu_tilde

    def as_dict(self) -> dict:
        return {
            "nu_tilde": self.nu_tilde,
            "nu_tilde_first_order": self.nu_tilde_first_order,
            "log_negativity": self.log_negativity,
            "beta_modulus": self.beta_modulus,
            "squeezing_r": self.squeezing_r,
            "psi_k": self.angles[0],
            "psi_kp": self.angles[1],
            "squeezer_residual": self.squeezer_residual,
            "mean_excitations_k": self.mean_excitations[0],
            "mean_excitations_kp": self.mean_excitations[1],
            **self.extras,
        }
