"""Monte-Carlo error propagation and background subtraction.

Member ``i`` of an ensemble draws from its own generator seeded by
``(seed, i)``, so an ensemble is the same whatever order or worker count
builds it.
"""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import eigen, metrics, qstate
from .errors import EmptyEnsemble, NoConvergence, NonPhysical, OutOfRange, RejectionBudgetExceeded
from .tomo import MLConfig, fit_max_likelihood

PHYSICAL_TOL = 1e-10
DEFAULT_SIZE = 5000
DEFAULT_BACKGROUND = 0.49
DEFAULT_METRICS = ("tangle", "concurrence", "linear_entropy", "dop_photon1", "dop_photon2", "largest_eigenvalue")


@dataclass(frozen=True, eq=False)
class Ensemble:
    members: tuple
    seed: int
    requested_size: int
    rejected_count: int = 0
    background_fraction: float = 0.0

    def __len__(self):
        return len(self.members)

    def stack(self):
        return np.array([m.matrix for m in self.members])


@dataclass(frozen=True)
class StatSummary:
    metric: str
    mean: float
    std: float
    sample_count: int
    point: float = None

    def to_dict(self):
        d = {"metric": self.metric, "mean": self.mean, "std": self.std, "sample_count": self.sample_count}
        if self.point is not None:
            d["point"] = self.point
        return d


def member_rng(seed, index):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(index),))))


def sample_dataset(ms, rng):
    """Redraw every probability from N(p, sigma^2); sigmas are kept, nothing is clamped."""
    z = rng.standard_normal(len(ms))
    return ms.with_values(ms.p + ms.sigma * z)


def subtract_background(rho, fraction):
    """(rho - fraction I/4) / (1 - fraction); raises NonPhysical on a negative eigenvalue."""
    if not 0.0 <= fraction < 1.0:
        raise OutOfRange(f"background fraction must be in [0, 1), got {fraction}")
    m = qstate.as_matrix(rho)
    d = m.shape[-1]
    out = (m - fraction * np.eye(d) / d) / (1.0 - fraction)
    wmin = float(eigen.eigvalsh(out)[0])
    if wmin < -PHYSICAL_TOL:
        raise NonPhysical(wmin)
    return qstate._trusted(out)


def restore_background(rho, fraction):
    """Inverse of :func:`subtract_background`."""
    m = qstate.as_matrix(rho)
    d = m.shape[-1]
    return (1.0 - fraction) * m + fraction * np.eye(d) / d


def _member(ms, seed, index, cfg, fraction):
    data = sample_dataset(ms, member_rng(seed, index))
    res = fit_max_likelihood(data, cfg)
    if not res.converged:
        raise NoConvergence(f"member {index}: no convergence after {res.iterations} iterations", best=res, index=index)
    if fraction == 0.0:
        return res.rho
    try:
        return subtract_background(res.rho, fraction)
    except NonPhysical:
        return None


def _member_range(args):
    ms, seed, start, stop, cfg, fraction = args
    return [_member(ms, seed, i, cfg, fraction) for i in range(start, stop)]


def _members(ms, seed, start, stop, cfg, fraction, workers):
    if workers <= 1 or stop - start < 2:
        return _member_range((ms, seed, start, stop, cfg, fraction))
    edges = np.linspace(start, stop, workers + 1).astype(int)
    jobs = [(ms, seed, int(a), int(b), cfg, fraction) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return [m for chunk in pool.map(_member_range, jobs) for m in chunk]


def build_ensemble(ms, size=DEFAULT_SIZE, seed=0, cfg=None, workers=1):
    """Resample the data set ``size`` times and reconstruct each copy."""
    if size < 1:
        raise OutOfRange("ensemble size must be >= 1")
    cfg = MLConfig() if cfg is None else cfg
    members = _members(ms, seed, 0, size, cfg, 0.0, workers)
    return Ensemble(tuple(members), int(seed), int(size), 0, 0.0)


def background_ensemble(ms, fraction=DEFAULT_BACKGROUND, size=DEFAULT_SIZE, seed=0, cfg=None, workers=1, max_draws=None):
    """Rejection sampling: keep subtracted reconstructions until ``size`` are physical."""
    if size < 1:
        raise OutOfRange("ensemble size must be >= 1")
    if fraction == 0.0:
        return build_ensemble(ms, size, seed, cfg, workers)
    cfg = MLConfig() if cfg is None else cfg
    max_draws = 100 * size if max_draws is None else max_draws
    accepted, drawn = [], 0
    while len(accepted) < size:
        if drawn >= max_draws:
            raise RejectionBudgetExceeded(f"only {len(accepted)} of {size} physical states after {drawn} draws")
        need = size - len(accepted)
        stop = min(drawn + max(need + need // 4, 8), max_draws)
        for offset, m in enumerate(_members(ms, seed, drawn, stop, cfg, fraction, workers)):
            if m is not None and len(accepted) < size:
                accepted.append(m)
                last = drawn + offset
        drawn = stop
    # Draws past the last accepted index do not count as rejections.
    rejected = last + 1 - size
    return Ensemble(tuple(accepted), int(seed), int(size), int(rejected), float(fraction))


def metric_values(stack, name):
    """Vectorized metric over a ``(k, 4, 4)`` stack."""
    if name == "tangle":
        return metrics.concurrence_values(stack)[0] ** 2
    if name == "concurrence":
        return metrics.concurrence_values(stack)[0]
    if name == "linear_entropy":
        return qstate.linear_entropy(stack)
    if name == "dop_photon1":
        return metrics.degree_of_polarization(qstate.partial_trace(stack, "photon1"))
    if name == "dop_photon2":
        return metrics.degree_of_polarization(qstate.partial_trace(stack, "photon2"))
    if name == "largest_eigenvalue":
        return eigen.eigvalsh(stack)[..., -1]
    if name == "peres_min_eigenvalue":
        return metrics.peres_min_eigenvalue(stack)
    raise KeyError(f"unknown metric {name!r}")


def ensemble_statistics(e, names=DEFAULT_METRICS, point=None):
    """Mean and population standard deviation of each metric over the ensemble.

    ``point`` (a density matrix) adds the point-estimate value of each metric.
    """
    if len(e) == 0:
        raise EmptyEnsemble("ensemble has no members")
    stack = e.stack()
    ref = None if point is None else qstate.as_matrix(point)[None]
    out = []
    for name in names:
        vals = np.asarray(metric_values(stack, name), dtype=float)
        pv = None if ref is None else float(metric_values(ref, name)[0])
        out.append(StatSummary(name, float(vals.mean()), float(vals.std()), int(vals.size), pv))
    return out


def summary_to_dict(e, stats):
    return {
        "seed": e.seed,
        "size": e.requested_size,
        "rejected": e.rejected_count,
        "background_fraction": e.background_fraction,
        "stats": [s.to_dict() for s in stats],
    }
