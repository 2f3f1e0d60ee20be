"""Coincidence counts to probabilities.

``g2 = C / (N / n)`` with Poisson errors on C and N (n exact), then one of
two normalizations:

* pairwise: ``P_A = g_A / (2 (g_A + g_B))`` for orthogonal photon-2
  settings A, B.  Every pair sums to 1/2, which pins photon 1's marginal
  to 1/2 in each measured basis.
* complete: ``P_k = g_k / sum(g)`` over a complete product basis
  ``{tt, tt', t't, t't'}``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import MissingSettings, SchemaError, ZeroCoincidences, ZeroDenominator
from .qstate import as_matrix
from .tomo import (
    DEFAULT_PAIRS,
    TABLE1_SETTINGS,
    MeasurementSet,
    ProbabilityRecord,
    check_setting,
    complete_groups,
    predicted_probabilities,
)


@dataclass(frozen=True)
class CountRecord:
    setting: str
    coincidences: int
    accidental_total: int
    peaks: int

    def __post_init__(self):
        check_setting(self.setting)
        for name in ("coincidences", "accidental_total", "peaks"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise SchemaError(f"{self.setting}: {name} must be an integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        if self.coincidences < 0:
            raise SchemaError(f"{self.setting}: coincidences must be >= 0")
        if self.accidental_total < 1 or self.peaks < 1:
            raise SchemaError(f"{self.setting}: accidental_total and peaks must be >= 1")

    def to_dict(self):
        return {
            "setting": self.setting,
            "coincidences": self.coincidences,
            "accidental_total": self.accidental_total,
            "peaks": self.peaks,
        }


@dataclass(frozen=True)
class G2Value:
    g2: float
    sigma: float
    setting: str = None


def second_order_correlation(rec):
    g2 = rec.coincidences * rec.peaks / rec.accidental_total
    if rec.coincidences == 0:
        raise ZeroCoincidences(g2)
    sigma = g2 * np.sqrt(1.0 / rec.coincidences + 1.0 / rec.accidental_total)
    return G2Value(float(g2), float(sigma), rec.setting)


def _record(g, p, sigma):
    if g.setting is None:
        raise SchemaError("G2Value needs a setting label to become a probability record")
    return ProbabilityRecord(g.setting, p, sigma)


def pairwise_normalize(g_a, g_b):
    s = g_a.g2 + g_b.g2
    if s <= 0:
        raise ZeroDenominator("g2 values of the pair sum to zero")
    p_a = 0.5 * g_a.g2 / s
    p_b = 0.5 - p_a
    # dP_A/dg_A = g_B / (2 s^2), dP_A/dg_B = -g_A / (2 s^2); P_B = 1/2 - P_A
    sig = np.hypot(g_b.g2 * g_a.sigma, g_a.g2 * g_b.sigma) / (2.0 * s * s)
    return _record(g_a, p_a, sig), _record(g_b, p_b, sig)


def complete_set_normalize(group):
    group = list(group)
    if len(group) != 4:
        raise SchemaError(f"a complete group has four settings, got {len(group)}")
    g = np.array([x.g2 for x in group])
    dg = np.array([x.sigma for x in group])
    s = g.sum()
    if s <= 0:
        raise ZeroDenominator("g2 values of the group sum to zero")
    p = g / s
    p[-1] = 1.0 - p[:-1].sum()
    jac = (np.eye(4) * s - g[:, None]) / s**2
    sig = np.sqrt((jac**2) @ (dg**2))
    return tuple(_record(x, pk, sk) for x, pk, sk in zip(group, p, sig))


def _scaled(g, refs):
    """P = g / sum(refs) with first-order errors; ``g`` must not be among ``refs``."""
    s = sum(r.g2 for r in refs)
    if s <= 0:
        raise ZeroDenominator(f"reference g2 values for {g.setting} sum to zero")
    var = (g.sigma / s) ** 2 + sum((g.g2 * r.sigma / s**2) ** 2 for r in refs)
    return g.g2 / s, float(np.sqrt(var))


def normalize_pairwise(g2s, pairs=DEFAULT_PAIRS):
    """Pairwise convention over a full setting list.

    Each reference pair fixes the normalizer for every setting sharing its
    photon-1 letter: settings in the pair go through :func:`pairwise_normalize`;
    the rest use ``P = g / (2 (g_A + g_B))``, i.e. the unmeasured orthogonal
    partner is estimated as ``g_A + g_B - g``.
    """
    by = {g.setting: g for g in g2s}
    ref = {}
    for a, b in pairs:
        if a[0] != b[0]:
            raise SchemaError(f"pair ({a}, {b}) must share the photon-1 setting")
        if a not in by or b not in by:
            raise MissingSettings({a, b} - set(by))
        ref[a[0]] = (a, b)
    out = {}
    for a, b in ref.values():
        ra, rb = pairwise_normalize(by[a], by[b])
        out[a], out[b] = ra, rb
    for g in g2s:
        if g.setting in out:
            continue
        if g.setting[0] not in ref:
            raise MissingSettings([f"{g.setting[0]}? reference pair for {g.setting}"])
        a, b = ref[g.setting[0]]
        p, sig = _scaled(g, (by[a], by[b]))
        out[g.setting] = _record(g, 0.5 * p, 0.5 * sig)
    return MeasurementSet(tuple(out[g.setting] for g in g2s))


def normalize_complete(g2s, groups=None):
    """Complete-set convention.

    Settings inside a complete quadruple are normalized within it; any other
    setting is scaled by the sum of the first (reference) quadruple.
    """
    by = {g.setting: g for g in g2s}
    groups = complete_groups(by) if groups is None else [tuple(q) for q in groups]
    if not groups:
        raise MissingSettings(["a complete quadruple such as HH, HV, VH, VV"])
    out = {}
    for q in groups:
        missing = set(q) - set(by)
        if missing:
            raise MissingSettings(missing)
        for rec in complete_set_normalize(by[s] for s in q):
            out.setdefault(rec.setting, rec)
    ref = [by[s] for s in groups[0]]
    for g in g2s:
        if g.setting not in out:
            p, sig = _scaled(g, ref)
            out[g.setting] = _record(g, p, sig)
    return MeasurementSet(tuple(out[g.setting] for g in g2s))


def counts_to_probabilities(records, normalization="pairwise", pairs=DEFAULT_PAIRS):
    g2s = [second_order_correlation(r) for r in records]
    if normalization == "pairwise":
        return normalize_pairwise(g2s, pairs)
    if normalization == "complete":
        return normalize_complete(g2s)
    raise SchemaError(f"unknown normalization {normalization!r}")


def synthesize_counts(
    rho,
    pairs_per_setting,
    background_fraction=0.0,
    accidental_level=100.0,
    peaks=4,
    seed=0,
    settings=TABLE1_SETTINGS,
):
    """Poisson coincidence counts for each setting, including unpolarized background."""
    if not 0.0 <= background_fraction < 1.0:
        raise SchemaError("background_fraction must be in [0, 1)")
    if accidental_level <= 0 or peaks < 1:
        raise SchemaError("accidental_level must be > 0 and peaks >= 1")
    rng = np.random.default_rng(seed)
    probs = np.clip(predicted_probabilities(as_matrix(rho), tuple(settings)), 0.0, None)
    means = pairs_per_setting * ((1.0 - background_fraction) * probs + background_fraction / 4.0)
    out = []
    for s, mu in zip(settings, means):
        c = int(rng.poisson(mu))
        n_acc = max(1, int(rng.poisson(accidental_level * peaks)))
        out.append(CountRecord(s, c, n_acc, peaks))
    return out


def counts_from_dict(d):
    try:
        return [CountRecord(**r) for r in d["records"]]
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"malformed counts JSON: {exc}") from None


def counts_to_dict(records):
    return {"records": [r.to_dict() for r in records]}
