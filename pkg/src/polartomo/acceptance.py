"""Checks behind ``polartomo reproduce-paper``.

Each check returns a :class:`Criterion`; tolerances are fixed here.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import counts, fitstats, io, mcerr, metrics, qstate, tomo

GOLDEN_TOL = 5e-3
BIAS_SOURCE_WEIGHT = 0.6
BIAS_PAIRS = 100_000
BIAS_ACCIDENTAL_LEVEL = 25_000.0


@dataclass(frozen=True)
class Criterion:
    id: int
    name: str
    passed: bool
    values: dict = field(default_factory=dict)

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id:2d}. {self.name}"

    def to_dict(self):
        return {"id": self.id, "name": self.name, "passed": self.passed, "values": self.values}


def _within(x, lo, hi):
    return bool(lo <= x <= hi)


class FixtureRun:
    """Lazily computed shared inputs for the checks."""

    def __init__(self, seed=1, samples=mcerr.DEFAULT_SIZE, property_samples=10_000, workers=1, cfg=None):
        self.seed = int(seed)
        self.samples = int(samples)
        self.property_samples = int(property_samples)
        self.workers = int(workers)
        self.cfg = tomo.MLConfig() if cfg is None else cfg
        self.table1 = io.load_table1()
        self.rho3d = io.load_rho3d()

    @cached_property
    def ml(self):
        return tomo.max_likelihood(self.table1, self.cfg)

    @cached_property
    def subtracted(self):
        return mcerr.subtract_background(self.rho3d, mcerr.DEFAULT_BACKGROUND)

    @cached_property
    def ensemble(self):
        return mcerr.build_ensemble(self.table1, self.samples, self.seed, self.cfg, self.workers)

    @cached_property
    def bg_ensemble(self):
        return mcerr.background_ensemble(
            self.table1, mcerr.DEFAULT_BACKGROUND, self.samples, self.seed, self.cfg, self.workers
        )

    @cached_property
    def ensemble_stats(self):
        return mcerr.ensemble_statistics(self.ensemble, point=self.ml)

    @cached_property
    def bg_stats(self):
        point = mcerr.subtract_background(self.ml, mcerr.DEFAULT_BACKGROUND)
        return mcerr.ensemble_statistics(self.bg_ensemble, point=point)

    def rng(self, stream):
        return np.random.default_rng([self.seed, stream])


def _stat(stats, name):
    return next(s for s in stats if s.metric == name)


def golden_reconstruction(run):
    diff = run.ml.matrix - run.rho3d.matrix
    re_err = float(np.max(np.abs(diff.real)))
    im_err = float(np.max(np.abs(diff.imag)))
    return Criterion(
        1,
        "ML reconstruction of table1 matches rho3d within 5e-3",
        max(re_err, im_err) <= GOLDEN_TOL,
        {"max_abs_error_re": re_err, "max_abs_error_im": im_err},
    )


def tangle_verdict(run):
    t = metrics.tangle(run.rho3d)
    return Criterion(2, "tangle(rho3d) == 0", t == 0.0, {"tangle": t})


def purity(run):
    sl = float(qstate.linear_entropy(run.rho3d))
    m = run.rho3d.matrix
    oracle = 4.0 / 3.0 * (1.0 - float(sum(abs(m[i, j]) ** 2 for i in range(4) for j in range(4))))
    ok = _within(sl, 0.92, 0.99) and abs(oracle - 0.942) <= 0.005 and abs(sl - oracle) <= 1e-12
    return Criterion(3, "linear entropy of rho3d in [0.92, 0.99], ~0.942", ok, {"linear_entropy": sl, "oracle": oracle})


def marginals(run):
    d1, d2 = metrics.photon_dops(run.rho3d)
    ok = abs(d2 - 0.045) <= 0.002 and d1 <= 0.001
    return Criterion(4, "photon-2 DOP 0.045 +- 0.002, photon-1 DOP <= 0.001", ok, {"dop_photon1": d1, "dop_photon2": d2})


def background_point(run):
    t = metrics.tangle(run.subtracted)
    d2 = metrics.photon_dops(run.subtracted)[1]
    ok = _within(t, 0.018, 0.038) and _within(d2, 0.080, 0.096)
    return Criterion(5, "subtracted rho3d: tangle in [0.018, 0.038], photon-2 DOP in [0.080, 0.096]", ok,
                     {"tangle": t, "dop_photon2": float(d2)})


def mc_uncertainties(run):
    s2 = _stat(run.ensemble_stats, "dop_photon2").std
    s1 = _stat(run.ensemble_stats, "dop_photon1").std
    st = _stat(run.bg_stats, "tangle").std
    ok = _within(s2, 0.010, 0.029) and _within(st, 0.011, 0.033) and _within(s1, 0.006, 0.017)
    return Criterion(
        6,
        f"MC std (n={run.samples}): photon-2 DOP, subtracted tangle, photon-1 DOP within +-50%",
        ok,
        {
            "dop_photon2_std": s2,
            "subtracted_tangle_std": st,
            "dop_photon1_std": s1,
            "subtracted_tangle_mean": _stat(run.bg_stats, "tangle").mean,
            "rejected": run.bg_ensemble.rejected_count,
        },
    )


def significance(run):
    d = fitstats.sigma_distance(0.222, 0.028, 0.50)
    return Criterion(7, "sigma_distance(0.222, 0.028, 0.50) = 9.93 +- 0.01", abs(d - 9.93) <= 0.01, {"sigma_distance": d})


def normalization_audit(run):
    rep = tomo.check_complete_normalization(run.table1)
    pairs_ok = rep.pairwise and all(abs(v - 0.5) <= 1e-5 for v in rep.pair_sums.values())
    quad = tomo.group_sum(run.table1, ("VV", "VH", "HH", "HV"))
    dl_dd = tomo.group_sum(run.table1, ("DL", "DD"))
    ok = pairs_ok and abs(quad - 1.0) <= 1e-5 and abs(dl_dd - 0.53764) <= 1e-5
    d = rep.to_dict()
    return Criterion(8, "table1 pairs sum to 0.5, HV quadruple to 1, {DL, DD} to 0.53764", ok,
                     {"pair_sums": d["pair_sums"], "hv_quadruple": quad, "dl_dd": dl_dd, "convention": rep.convention})


def _mixed_beyond_munro(rng, n, rank):
    """Random states with linear entropy above 8/9: sigma mixed with I/4 at a random weight."""
    sig = qstate.random_density_matrices(rng, n, rank=rank)
    pur = qstate.purity(sig)
    wmax = np.sqrt((1.0 / 12.0) / np.maximum(pur - 0.25, 1e-300))
    w = np.minimum(rng.uniform(0.0, 1.0, n) * wmax, 1.0)
    return w[:, None, None] * sig + (1.0 - w[:, None, None]) * np.eye(4) / 4.0


def property_suite(run):
    n = run.property_samples
    rng = run.rng(9)
    # Munro bound
    sizes = [n // 4] * 3 + [n - 3 * (n // 4)]
    parts = [_mixed_beyond_munro(rng, k, rank) for rank, k in zip((1, 2, 3, 4), sizes)]
    mixed = np.concatenate(parts)
    sl = qstate.linear_entropy(mixed)
    t_mixed = metrics.concurrence_values(mixed)[0] ** 2
    munro_ok = bool(np.all(sl > metrics.MUNRO_BOUND) and np.all(t_mixed == 0.0))

    # PPT <=> tangle > 0, guarded at |lambda_min| <= 1e-9
    states = qstate.random_density_matrices(rng, n)
    lmin = metrics.peres_min_eigenvalue(states)
    t = metrics.concurrence_values(states)[0] ** 2
    guarded = np.abs(lmin) <= metrics.PERES_TOL
    ppt_ent = lmin < -metrics.PERES_TOL
    mismatch = int(np.sum((ppt_ent != (t > 0.0)) & ~guarded))
    ppt_ok = mismatch == 0

    # Werner family
    p = np.linspace(0.0, 1.0, 101)
    werner = np.array([qstate.werner_state(x).matrix for x in p])
    c = metrics.concurrence_values(werner)[0]
    werner_err = float(np.max(np.abs(c - np.maximum(0.0, (3 * p - 1) / 2))))

    # Degree of correlation limits
    theta = np.linspace(0.0, np.pi, 181)
    phi = qstate.bell_state("phi+").projector()
    mix = np.eye(4) / 4
    doc_phi = max(abs(metrics.degree_of_correlation(phi, th) - 1.0) for th in theta)
    doc_mix = max(abs(metrics.degree_of_correlation(mix, th)) for th in theta)
    doc_ok = doc_phi <= 1e-12 and doc_mix <= 1e-12

    ok = munro_ok and ppt_ok and werner_err <= 1e-8 and doc_ok
    return Criterion(
        9,
        "property suite: Munro bound, PPT <=> T > 0, Werner concurrence, correlation limits",
        ok,
        {
            "munro_states": int(mixed.shape[0]),
            "munro_max_tangle": float(t_mixed.max()),
            "ppt_states": n,
            "ppt_entangled": int(ppt_ent.sum()),
            "ppt_guarded": int(guarded.sum()),
            "ppt_mismatches": mismatch,
            "werner_max_error": werner_err,
            "doc_phi_max_error": float(doc_phi),
            "doc_mixed_max_error": float(doc_mix),
        },
    )


def bias_source(dop=0.3, weight=BIAS_SOURCE_WEIGHT):
    """weight |psi><psi| + (1 - weight) I/4, psi = cos a|HH> + sin a|VV>, photon-1 DOP = dop."""
    a = 0.5 * np.arccos(dop / weight)
    psi = np.array([np.cos(a), 0.0, 0.0, np.sin(a)])
    return qstate.DensityMatrix(weight * np.outer(psi, psi) + (1.0 - weight) * np.eye(4) / 4.0)


def pipeline_bias(run):
    src = bias_source()
    recs = counts.synthesize_counts(src, BIAS_PAIRS, 0.0, BIAS_ACCIDENTAL_LEVEL, 4, seed=run.seed)
    vals = {"true_dop_photon1": float(metrics.photon_dops(src)[0])}
    for conv in ("pairwise", "complete"):
        rho = tomo.max_likelihood(counts.counts_to_probabilities(recs, conv), run.cfg)
        vals[f"{conv}_dop_photon1"] = float(metrics.photon_dops(rho)[0])
    ok = vals["pairwise_dop_photon1"] < 0.05 and abs(vals["complete_dop_photon1"] - 0.30) <= 0.03
    return Criterion(10, "pairwise normalization hides photon-1 DOP 0.3; complete-set recovers it", ok, vals)


def determinism_probe(run, members=50):
    """Recompute an ensemble prefix and compare bit-for-bit with the stored members."""
    k = min(members, run.samples)
    again = mcerr.build_ensemble(run.table1, k, run.seed, run.cfg)
    same = all(np.array_equal(a.matrix, b.matrix) for a, b in zip(again.members, run.ensemble.members[:k]))
    return Criterion(11, "seeded runs are reproducible (member-wise bit identity)", bool(same), {"members_checked": k})


CHECKS = (
    golden_reconstruction,
    tangle_verdict,
    purity,
    marginals,
    background_point,
    mc_uncertainties,
    significance,
    normalization_audit,
    property_suite,
    pipeline_bias,
    determinism_probe,
)


def run_all(run):
    return [check(run) for check in CHECKS]


def report(run, criteria):
    return {
        "seed": run.seed,
        "samples": run.samples,
        "property_samples": run.property_samples,
        "all_passed": all(c.passed for c in criteria),
        "criteria": [c.to_dict() for c in criteria],
        "ensemble": mcerr.summary_to_dict(run.ensemble, run.ensemble_stats),
        "background_ensemble": mcerr.summary_to_dict(run.bg_ensemble, run.bg_stats),
    }
