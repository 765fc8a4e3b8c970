"""Grid sweeps over burn time and coast time, CSV and SVG output."""

from __future__ import annotations

import datetime as _dt
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cache import CoefficientCache
from .config import RunConfig
from .symplectic import log_negativity_from_nu, reduce_two_mode, smallest_pt_eigenvalue
from .trajectories import build_segment_symplectic, commutator_defect

log = logging.getLogger(__name__)

CSV_COLUMNS = ("tau", "t", "nu_tilde_1st_order", "log_negativity", "commutator_defect")


@dataclass(eq=False)
class SweepResult:
    tau: np.ndarray
    t: np.ndarray
    nu_first_order: np.ndarray
    log_negativity: np.ndarray
    commutator_defect: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.tau), len(self.t))
        for name in ("nu_first_order", "log_negativity", "commutator_defect"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} has shape {getattr(self, name).shape}, axes give {shape}")

    @property
    def failures(self) -> int:
        return int(np.sum(~np.isfinite(self.nu_first_order)))

    @property
    def is_two_dimensional(self) -> bool:
        return len(self.tau) > 1 and len(self.t) > 1


def _point(args):
    cfg, tau, t, cache_dir = args
    try:
        p = cfg.scenario(tau=tau, t=t)
        if p.total_time == 0:
            return 0.0, 0.0, 0.0, 0.0
        cache = CoefficientCache(cache_dir) if cache_dir is not None else None
        seg = build_segment_symplectic(p.trajectory(), cfg.geometry, tuple(cfg.modes),
                                       n_max=cfg.n_max, tol=cfg.quad_tol, cache=cache)
        nu = smallest_pt_eigenvalue(reduce_two_mode(seg.op, cfg.repetitions))
        return 1.0 - nu, log_negativity_from_nu(nu), commutator_defect(seg.op).norm, seg.block.unitarity_defect
    except Exception as exc:  # a failed point becomes a NaN row
        log.warning("sweep point tau=%r t=%r failed: %s", tau, t, exc)
        return math.nan, math.nan, math.nan, math.nan


def run_sweep(cfg: RunConfig, *, workers: int | None = None, cache_dir=None) -> SweepResult:
    """Evaluate the pipeline on the tau x t grid of ``cfg.sweep``.

    Axes that are not swept take the value from the sample scenario. Results
    are assembled in grid order regardless of worker scheduling.
    """
    if not cfg.sweep:
        raise ValueError("config has no sweep section")
    taus = cfg.sweep["tau"].values() if "tau" in cfg.sweep else np.array([cfg.sample["tau"]])
    ts = cfg.sweep["t"].values() if "t" in cfg.sweep else np.array([cfg.sample["t"]])
    jobs = [(cfg, float(a), float(b), cache_dir) for a in taus for b in ts]
    workers = workers or cfg.workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        out = [_point(j) for j in jobs]
    arr = np.array(out, dtype=float).reshape(len(taus), len(ts), 4)
    finite = arr[..., 3][np.isfinite(arr[..., 3])]
    meta = {
        "config_sha256": cfg.physics_hash(),
        "version": __version__,
        "max_unitarity_defect": float(finite.max()) if finite.size else math.nan,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    return SweepResult(taus, ts, arr[..., 0], arr[..., 1], arr[..., 2], meta)


def csv_text(res: SweepResult) -> str:
    buf = io.StringIO()
    buf.write(f"# relcavity {res.metadata.get('version', __version__)}\n")
    buf.write(f"# config_sha256 {res.metadata.get('config_sha256', '')}\n")
    buf.write(",".join(CSV_COLUMNS) + "\n")
    for i, tau in enumerate(res.tau):
        for j, t in enumerate(res.t):
            row = (tau, t, res.nu_first_order[i, j], res.log_negativity[i, j], res.commutator_defect[i, j])
            buf.write(",".join(f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


def write_csv(res: SweepResult, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(res))
    return path


def read_csv(path) -> np.ndarray:
    """Load the numeric rows of a sweep CSV (comment lines skipped)."""
    return np.loadtxt(path, delimiter=",", comments="#", skiprows=3)


def render_heatmap(res: SweepResult, path, *, quantity: str = "nu_first_order") -> Path:
    """SVG heatmap of a two-variable sweep; identical input gives identical bytes."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if not res.is_two_dimensional:
        raise ValueError("heatmap needs a two-variable sweep")
    data = getattr(res, quantity)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": "relcavity", "svg.fonttype": "path"}):
        fig, ax = plt.subplots(figsize=(5.5, 4.5))
        mesh = ax.pcolormesh(res.t, res.tau, data, shading="nearest", cmap="viridis")
        ax.set_xlabel("coast time t")
        ax.set_ylabel("burn time tau")
        label = {"nu_first_order": "1 - nu~_N", "log_negativity": "log negativity"}.get(quantity, quantity)
        fig.colorbar(mesh, ax=ax, label=label)
        fig.tight_layout()
        desc = f"relcavity {res.metadata.get('version', __version__)} config_sha256={res.metadata.get('config_sha256', '')}"
        fig.savefig(path, format="svg", metadata={"Date": None, "Description": desc})
        plt.close(fig)
    return path
