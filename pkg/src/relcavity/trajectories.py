"""Travel scenarios: piecewise coast/burn segments, repetition and resonances."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bogoliubov import (
    DEFAULT_NMAX,
    BogoliubovBlock,
    compose,
    compose_all,
    free_evolution_block,
    identity_block,
    invert,
    junction_block,
    massless_beta_modulus,
    mean_excitations,
)
from .modes import DEFAULT_QUAD_TOL, CavityGeometry, OutOfScopeError, check_mode, minkowski_frequency
from .symplectic import (
    EntanglementReport,
    SymplecticOp,
    coefficients_from_block,
    log_negativity_from_nu,
    reduce_two_mode,
    repeat,
    smallest_pt_eigenvalue,
    squeezer_decompose,
    symplectic_from_bogoliubov,
)

H_WARN = 0.01
H_MAX = 0.1

__all__ = [
    "Segment", "Trajectory", "ModePair", "SampleScenario", "SegmentTransform",
    "coast", "burn", "build_segment_symplectic", "repeat", "resonance_times",
    "has_first_order_resonance", "commutator_defect", "sample_scenario_B1",
    "sample_scenario_logneg", "repeated_beta_modulus", "predict_linear_growth", "analyze",
]


@dataclass(frozen=True)
class Segment:
    kind: str
    duration: float
    h_signed: float | None = None

    def __post_init__(self):
        if self.kind not in ("coast", "burn"):
            raise ValueError(f"segment kind must be 'coast' or 'burn', got {self.kind!r}")
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ValueError(f"segment duration must be >= 0, got {self.duration}")
        if self.kind == "coast" and self.h_signed is not None:
            raise ValueError("coast segments carry no acceleration")
        if self.kind == "burn":
            if self.h_signed is None or not abs(self.h_signed) < 2:
                raise ValueError(f"burn needs |h| < 2, got {self.h_signed}")


def coast(duration: float) -> Segment:
    return Segment("coast", duration)


def burn(duration: float, h_signed: float) -> Segment:
    return Segment("burn", duration, h_signed)


@dataclass(frozen=True)
class Trajectory:
    """Segments in the order the cavity flies them, repeated ``repetitions`` times."""

    segments: tuple[Segment, ...]
    repetitions: int = 1

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise ValueError(f"repetitions must be an integer >= 1, got {self.repetitions}")
        if self.total_time <= 0:
            raise ValueError("trajectory must have positive total proper time")

    @property
    def total_time(self) -> float:
        return sum(s.duration for s in self.segments)


@dataclass(frozen=True)
class ModePair:
    k: int
    kp: int

    def __post_init__(self):
        check_mode(self.k)
        check_mode(self.kp)
        if self.k == self.kp:
            raise ValueError(f"mode pair invariant violated: k and k' must differ (both {self.k})")

    def __iter__(self):
        return iter((self.k, self.kp))


@dataclass(frozen=True)
class SampleScenario:
    """Burn h for tau, coast t, burn epsilon*y*h for tau, coast t."""

    tau: float
    t: float
    h: float
    y: float = 1.0
    epsilon: int = 1
    k: int = 1
    kp: int = 2
    N: int = 1

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError(f"burn ratio y must be positive, got {self.y}")
        if self.epsilon not in (1, -1):
            raise ValueError(f"epsilon must be +1 or -1, got {self.epsilon}")
        ModePair(self.k, self.kp)
        if self.tau < 0 or self.t < 0:
            raise ValueError("tau and t must be non-negative")

    @property
    def modes(self) -> ModePair:
        return ModePair(self.k, self.kp)

    @property
    def total_time(self) -> float:
        return 2.0 * (self.tau + self.t)

    def trajectory(self) -> Trajectory:
        return Trajectory(
            (burn(self.tau, self.h), coast(self.t), burn(self.tau, self.epsilon * self.y * self.h), coast(self.t)),
            self.N,
        )

    def resonance_order(self, g: CavityGeometry) -> float:
        """Total time in units of 2 pi / (omega_k + omega_k'); an integer at resonance."""
        return self.total_time * _pair_frequency(self.k, self.kp, g) / (2 * math.pi)


def _pair_frequency(k, kp, g: CavityGeometry) -> float:
    return minkowski_frequency(k, g) + minkowski_frequency(kp, g)


@dataclass(frozen=True, eq=False)
class SegmentTransform:
    block: BogoliubovBlock
    op: SymplecticOp


def _check_h(h: float):
    if abs(h) > H_MAX:
        raise ValueError(f"|h|={abs(h)} exceeds the perturbative range {H_MAX}")
    if abs(h) > H_WARN:
        warnings.warn(f"|h|={abs(h)} > {H_WARN}: first-order results lose accuracy", RuntimeWarning, stacklevel=3)


def build_segment_symplectic(
    traj: Trajectory,
    g: CavityGeometry,
    modes: Sequence[int],
    *,
    n_max: int = DEFAULT_NMAX,
    tol: float = DEFAULT_QUAD_TOL,
    cache=None,
) -> SegmentTransform:
    """Compose one period of ``traj`` on the truncated mode space.

    A burn is junction, accelerated free evolution, inverse junction; a coast
    is inertial free evolution. Returns the full block and the symplectic
    transformation restricted to ``modes``.
    """
    if g.mass != 0 and any(s.kind == "burn" and s.h_signed for s in traj.segments):
        raise OutOfScopeError("accelerated segments are only implemented for the massless field")
    parts = []
    for seg in traj.segments:
        if seg.kind == "coast" or seg.h_signed == 0:
            parts.append(free_evolution_block(g, seg.duration, "inertial", n_max))
            continue
        _check_h(seg.h_signed)
        v = junction_block(g.L, seg.h_signed, n_max, tol=tol, cache=cache)
        u = free_evolution_block(g.with_h(abs(seg.h_signed)), seg.duration, "accelerated", n_max)
        parts.append(compose_all(v, u, invert(v)))
    block = compose_all(*parts) if parts else identity_block(n_max)
    return SegmentTransform(block, symplectic_from_bogoliubov(block, tuple(modes)))


def resonance_times(k, kp, g: CavityGeometry, n: int) -> float:
    """T_n = 2 n pi / (omega_k + omega_k')."""
    if int(n) != n or n < 1:
        raise ValueError(f"resonance order must be an integer >= 1, got {n}")
    return 2 * n * math.pi / _pair_frequency(k, kp, g)


def has_first_order_resonance(k, kp, g: CavityGeometry | None = None) -> bool:
    """True when beta1_kk' is nonzero, i.e. the modes are oddly separated (massless)."""
    if g is not None and g.mass != 0:
        raise OutOfScopeError("resonance predicate implemented for the massless field only")
    return massless_beta_modulus(k, kp) != 0


@dataclass(frozen=True)
class CommutatorDefect:
    norm: float
    w: complex

    @property
    def predicted_norm(self) -> float:
        """Frobenius norm of [[0, C], [C^T, 0]] with C = Re(w) 1 - Im(w) sigma_x."""
        return 2.0 * abs(self.w)


def commutator_defect(S) -> CommutatorDefect:
    """Frobenius norm of S^T S - S S^T and the first-order w = 2 (G_k* - G_k') B_kk'.

    G and B are read off S itself: G from the diagonal blocks, B from the
    upper off-diagonal block.
    """
    m = np.asarray(S.matrix if isinstance(S, SymplecticOp) else S, dtype=float)
    norm = float(np.linalg.norm(m.T @ m - m @ m.T))
    g_k, _ = coefficients_from_block(m[:2, :2])
    g_kp, _ = coefficients_from_block(m[2:, 2:])
    _, b = coefficients_from_block(m[:2, 2:])
    return CommutatorDefect(norm, 2 * (np.conj(g_k) - g_kp) * b)


def _phase_products(p: SampleScenario, g: CavityGeometry):
    wsum = _pair_frequency(p.k, p.kp, g)
    gg = np.exp(-1j * wsum * p.tau)  # g_k* g_k'*
    ff = np.exp(-1j * wsum * p.t)  # f_k* f_k'*
    return gg, ff


def sample_scenario_B1(p: SampleScenario, g: CavityGeometry) -> float:
    """|B1_kk'| = c_kk' |1 - g*g*| |1 + eps y g*g* f*f*| h for one period."""
    if g.mass != 0:
        raise OutOfScopeError("closed form holds for the massless field only")
    gg, ff = _phase_products(p, g)
    c = massless_beta_modulus(p.k, p.kp)
    return float(c * abs(1 - gg) * abs(1 + p.epsilon * p.y * gg * ff) * abs(p.h))


def sample_scenario_logneg(p: SampleScenario, g: CavityGeometry, *, rtol: float = 1e-9) -> float:
    """N c_kk' |(1 - (-1)^n e^{i(w_k + w_k') t})(1 + (-1)^n eps y)| h at the n-th resonance.

    Raises ValueError unless 2 (tau + t) equals a resonance time T_n.
    """
    if g.mass != 0:
        raise OutOfScopeError("closed form holds for the massless field only")
    order = p.resonance_order(g)
    n = round(order)
    if n < 1 or abs(order - n) > rtol * max(1.0, order):
        raise ValueError(
            f"total time {p.total_time} is not a resonance time (order {order:.6g}); "
            "the closed form only holds at T = T_n"
        )
    sign = (-1) ** n
    phase = np.exp(1j * _pair_frequency(p.k, p.kp, g) * p.t)
    c = massless_beta_modulus(p.k, p.kp)
    return float(p.N * c * abs((1 - sign * phase) * (1 + sign * p.epsilon * p.y)) * abs(p.h))


def repeated_beta_modulus(p: SampleScenario, g: CavityGeometry) -> float:
    """First-order |B_kk'| after N periods, resonant or not.

    Each period multiplies the accumulated coefficient by phases, so the N
    contributions add as a geometric series with ratio e^{i theta},
    theta = (w_k + w_k') T, giving |B1| |sin(N theta/2) / sin(theta/2)|.
    """
    theta = _pair_frequency(p.k, p.kp, g) * p.total_time
    half = math.sin(theta / 2)
    if abs(half) < 1e-12:
        factor = float(p.N)
    else:
        factor = abs(math.sin(p.N * theta / 2) / half)
    return sample_scenario_B1(p, g) * factor


@dataclass(frozen=True, eq=False)
class GrowthSeries:
    N: np.ndarray
    nu_first_order: np.ndarray
    linear: np.ndarray

    @property
    def max_relative_deviation(self) -> float:
        return float(np.max(np.abs(self.nu_first_order / self.linear - 1.0)))


def predict_linear_growth(S: SymplecticOp, N_max: int) -> GrowthSeries:
    """nu~^(1)_N = 1 - nu~_N for N = 1..N_max next to the line N nu~^(1)_1."""
    Ns = np.arange(1, N_max + 1)
    nus = np.empty(len(Ns))
    power = S.matrix
    for i, _ in enumerate(Ns):
        if i:
            power = S.matrix @ power
        nus[i] = 1.0 - smallest_pt_eigenvalue(power.T @ power)
    return GrowthSeries(Ns, nus, Ns * nus[0])


def analyze(
    traj: Trajectory,
    g: CavityGeometry,
    modes: Sequence[int],
    *,
    n_max: int = DEFAULT_NMAX,
    tol: float = DEFAULT_QUAD_TOL,
    cache=None,
    transform: SegmentTransform | None = None,
) -> EntanglementReport:
    """Entanglement between ``modes`` after ``traj.repetitions`` periods of ``traj``."""
    pair = ModePair(*modes)
    seg = transform or build_segment_symplectic(traj, g, tuple(pair), n_max=n_max, tol=tol, cache=cache)
    SN = repeat(seg.op, traj.repetitions)
    sigma = reduce_two_mode(seg.op, traj.repetitions)
    nu = smallest_pt_eigenvalue(sigma)
    fit = squeezer_decompose(SN)
    full = seg.block
    for _ in range(traj.repetitions - 1):
        full = compose(full, seg.block)
    _, b = coefficients_from_block(SN.matrix[:2, 2:])
    cd = commutator_defect(seg.op)
    return EntanglementReport(
        nu_tilde=nu,
        log_negativity=log_negativity_from_nu(nu),
        squeezing_r=fit.r,
        angles=(fit.psi_k, fit.psi_kp),
        mean_excitations=(mean_excitations(full, pair.k), mean_excitations(full, pair.kp)),
        beta_modulus=abs(b),
        squeezer_residual=fit.residual,
        extras={
            "repetitions": traj.repetitions,
            "total_time": traj.total_time,
            "commutator_defect": cd.norm,
            "w_modulus": abs(cd.w),
            "truncation_defect": seg.op.truncation_defect,
            "unitarity_defect": full.unitarity_defect,
            "purity_det": float(np.linalg.det(sigma.matrix)),
        },
    )
