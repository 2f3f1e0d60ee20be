"""Measurement model and density-matrix reconstruction.

Settings are two-letter labels, first letter photon 1, drawn from
``H V D L R`` with ``|D> = (|H> + |V>)/sqrt2``, ``|L> = (|H> + i|V>)/sqrt2``
and ``|R> = (|H> - i|V>)/sqrt2``.

Maximum likelihood uses the Gaussian objective implied by per-record
uncertainties, ``sum_k (Tr(rho P_k) - p_k)^2 / (2 sigma_k^2)``, over the
physical parameterization ``rho = T^H T / Tr(T^H T)`` with ``T`` lower
triangular (4 real diagonal entries, 6 complex sub-diagonal entries).
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache
import itertools

import numpy as np

from . import eigen
from .errors import (
    DegenerateSigma,
    MissingSettings,
    NoConvergence,
    SchemaError,
    UnderdeterminedSystem,
    UnknownLabel,
)
from .qstate import SIGMA_X, SIGMA_Y, SIGMA_Z, DensityMatrix, _trusted, as_matrix

_S = 1.0 / np.sqrt(2.0)
KETS = {
    "H": np.array([1.0, 0.0], dtype=complex),
    "V": np.array([0.0, 1.0], dtype=complex),
    "D": np.array([_S, _S], dtype=complex),
    "L": np.array([_S, 1j * _S], dtype=complex),
    "R": np.array([_S, -1j * _S], dtype=complex),
}
ORTHOGONAL = {"H": "V", "V": "H", "L": "R", "R": "L"}

# Order of the published table.
TABLE1_SETTINGS = (
    "VV", "VH", "HH", "HV", "LV", "LH", "DH", "DV",
    "DL", "DD", "LD", "VD", "HD", "HR", "VR", "LR",
)
DEFAULT_PAIRS = (("VV", "VH"), ("HH", "HV"), ("LV", "LH"), ("DH", "DV"))


def check_setting(label):
    if not isinstance(label, str) or len(label) != 2 or any(c not in KETS for c in label):
        raise UnknownLabel(f"unknown setting label {label!r}")
    return label


@dataclass(frozen=True)
class ProbabilityRecord:
    setting: str
    p: float
    sigma: float = 0.0

    def __post_init__(self):
        check_setting(self.setting)
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not self.sigma >= 0.0:
            raise SchemaError(f"{self.setting}: sigma must be >= 0, got {self.sigma}")

    def to_dict(self):
        return {"setting": self.setting, "p": self.p, "sigma": self.sigma}


@dataclass(frozen=True)
class MeasurementSet:
    records: tuple = field(default_factory=tuple)

    def __post_init__(self):
        recs = tuple(self.records)
        seen = set()
        for r in recs:
            if r.setting in seen:
                raise SchemaError(f"duplicate setting {r.setting}")
            seen.add(r.setting)
        object.__setattr__(self, "records", recs)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def settings(self):
        return tuple(r.setting for r in self.records)

    @property
    def p(self):
        return np.array([r.p for r in self.records])

    @property
    def sigma(self):
        return np.array([r.sigma for r in self.records])

    def get(self, setting):
        for r in self.records:
            if r.setting == setting:
                return r
        raise MissingSettings([setting])

    def with_values(self, p):
        """Same settings and sigmas with new probabilities."""
        return MeasurementSet(tuple(replace(r, p=float(v)) for r, v in zip(self.records, p)))

    @classmethod
    def from_arrays(cls, settings, p, sigma):
        return cls(tuple(ProbabilityRecord(s, a, b) for s, a, b in zip(settings, p, sigma)))

    @classmethod
    def from_dict(cls, d):
        try:
            rows = d["measurements"]
            return cls(tuple(ProbabilityRecord(r["setting"], r["p"], r.get("sigma", 0.0)) for r in rows))
        except (KeyError, TypeError) as exc:
            raise SchemaError(f"malformed measurement JSON: {exc}") from None

    def to_dict(self):
        return {"measurements": [r.to_dict() for r in self.records]}


@dataclass(frozen=True)
class MLConfig:
    max_iterations: int = 5000
    objective_tolerance: float = 1e-12
    step_tolerance: float = 1e-10

    def __post_init__(self):
        if self.max_iterations <= 0 or self.objective_tolerance <= 0 or self.step_tolerance <= 0:
            raise ValueError("MLConfig fields must all be positive")


@dataclass(frozen=True)
class MLResult:
    rho: DensityMatrix
    objective: float
    iterations: int
    converged: bool


# --- measurement model -------------------------------------------------------

@lru_cache(maxsize=None)
def setting_projector(label):
    check_setting(label)
    v = np.kron(KETS[label[0]], KETS[label[1]])
    proj = np.outer(v, np.conj(v))
    proj.setflags(write=False)
    return proj


@lru_cache(maxsize=64)
def projector_stack(settings):
    stack = np.array([setting_projector(s) for s in settings])
    stack.setflags(write=False)
    return stack


def predicted_probability(rho, label):
    return float(np.real(np.trace(as_matrix(rho) @ setting_projector(label))))


def predicted_probabilities(rho, settings):
    """Born-rule probabilities ``Tr(rho P_k)``; ``rho`` may be a stack."""
    m = as_matrix(rho)
    return np.einsum("kij,...ji->...k", projector_stack(tuple(settings)), m).real


# --- linear inversion --------------------------------------------------------

_PAULI = (np.eye(2, dtype=complex), SIGMA_X, SIGMA_Y, SIGMA_Z)
# Orthonormal Hermitian basis under <A, B> = Tr(A B); index 0 is I/2.
HERMITIAN_BASIS = np.array([np.kron(a, b) / 2.0 for a in _PAULI for b in _PAULI])


@lru_cache(maxsize=64)
def _design(settings):
    a = np.einsum("kij,bji->kb", projector_stack(settings), HERMITIAN_BASIS).real
    pinv = None
    rank = np.linalg.matrix_rank(a[:, 1:])
    if rank == 15:
        pinv = np.linalg.pinv(a[:, 1:])
    return a, pinv, rank


def linear_inversion(ms):
    """Unit-trace Hermitian least-squares solution; may be non-positive."""
    a, pinv, rank = _design(ms.settings)
    if pinv is None:
        raise UnderdeterminedSystem(15 - rank)
    # Tr rho = 1 pins the identity coefficient at 1/2.
    x = pinv @ (ms.p - 0.5 * a[:, 0])
    coeffs = np.concatenate(([0.5], x))
    rho = np.einsum("b,bij->ij", coeffs, HERMITIAN_BASIS)
    return 0.5 * (rho + rho.conj().T)


# --- maximum likelihood --------------------------------------------------------

_DIAG = np.arange(4)
_LOW_R, _LOW_C = np.tril_indices(4, -1)


def params_to_t(t):
    m = np.zeros((4, 4), dtype=complex)
    m[_DIAG, _DIAG] = t[:4]
    m[_LOW_R, _LOW_C] = t[4:10] + 1j * t[10:16]
    return m


def t_to_rho(t):
    tm = params_to_t(t)
    m = tm.conj().T @ tm
    return m / np.trace(m).real


def rho_to_params(rho):
    """Lower-triangular T with T^H T = rho (rho must be positive definite)."""
    j = np.eye(4)[::-1]
    low = np.linalg.cholesky(j @ rho @ j)
    tm = (j @ low @ j).conj().T
    return np.concatenate((tm[_DIAG, _DIAG].real, tm[_LOW_R, _LOW_C].real, tm[_LOW_R, _LOW_C].imag))


def _residuals_and_jacobian(t, proj, p, w):
    tm = params_to_t(t)
    td = tm.conj().T
    m = td @ tm
    tau = np.trace(m).real
    pred = np.einsum("kij,ji->k", proj, m).real / tau
    x = proj @ td
    d_num = np.concatenate(
        (
            2.0 * x[:, _DIAG, _DIAG].real,
            2.0 * x[:, _LOW_C, _LOW_R].real,
            -2.0 * x[:, _LOW_C, _LOW_R].imag,
        ),
        axis=1,
    )
    d_tau = 2.0 * t
    jac = (d_num - pred[:, None] * d_tau[None, :]) / tau
    return (pred - p) * w, jac * w[:, None]


def _weights(ms):
    sigma = ms.sigma
    if np.all(sigma == 0.0):
        # Equal-weight limit; keeps zero-noise inputs usable.
        return np.full(sigma.shape, 1.0)
    if np.any(sigma <= 0.0):
        bad = [r.setting for r in ms.records if r.sigma <= 0.0]
        raise DegenerateSigma("zero sigma for " + ", ".join(bad))
    return 1.0 / sigma


def initial_params(ms, floor=1e-6):
    """Linear inversion with eigenvalues clipped at ``floor``, renormalized and factored."""
    w, v = eigen.eigh(linear_inversion(ms))
    w = np.clip(w, floor, None)
    rho = (v * w) @ v.conj().T
    rho /= np.trace(rho).real
    return rho_to_params(0.5 * (rho + rho.conj().T))


def objective(rho, ms, weights=None):
    w = _weights(ms) if weights is None else weights
    return 0.5 * float(np.sum(((predicted_probabilities(rho, ms.settings) - ms.p) * w) ** 2))


def _levenberg_marquardt(fun, t, cfg):
    r, jac = fun(t)
    cost = 0.5 * r @ r
    h = jac.T @ jac
    lam = 1e-3 * max(np.max(np.diag(h)), 1e-12)
    eye = np.eye(t.size)
    for it in range(1, cfg.max_iterations + 1):
        g = jac.T @ r
        h = jac.T @ jac
        step = np.linalg.solve(h + lam * eye, -g)
        small = np.linalg.norm(step) <= cfg.step_tolerance * (np.linalg.norm(t) + cfg.step_tolerance)
        t_new = t + step
        r_new, jac_new = fun(t_new)
        cost_new = 0.5 * r_new @ r_new
        if cost_new < cost:
            drop = cost - cost_new
            # rho is scale invariant in T; keep |t| = 1 for conditioning.
            s = np.linalg.norm(t_new)
            t, r, jac = t_new / s, r_new, jac_new * s
            cost_prev, cost = cost, cost_new
            lam = max(lam / 3.0, 1e-18)
            if small or drop <= cfg.objective_tolerance * cost_prev:
                return t, cost, it, True
        else:
            lam *= 4.0
            if small or lam > 1e30:
                return t, cost, it, True
    return t, cost, cfg.max_iterations, False


def fit_max_likelihood(ms, cfg=None, t0=None):
    """Run the reconstruction and report convergence instead of raising."""
    cfg = MLConfig() if cfg is None else cfg
    w = _weights(ms)
    proj = projector_stack(ms.settings)
    p = ms.p
    t = initial_params(ms) if t0 is None else np.asarray(t0, dtype=float)
    t = t / np.linalg.norm(t)
    t, cost, iters, ok = _levenberg_marquardt(lambda x: _residuals_and_jacobian(x, proj, p, w), t, cfg)
    return MLResult(_trusted(t_to_rho(t)), float(cost), iters, ok)


def max_likelihood(ms, cfg=None):
    """Physical density matrix minimizing the weighted squared residuals."""
    if len(ms) < 16:
        raise UnderdeterminedSystem(16 - len(ms))
    res = fit_max_likelihood(ms, cfg)
    if not res.converged:
        raise NoConvergence(f"no convergence after {res.iterations} iterations", best=res)
    return res.rho


# --- normalization audit -------------------------------------------------------

@dataclass(frozen=True)
class NormalizationReport:
    pair_sums: dict
    quadruple_sums: dict
    pairwise: bool
    complete: bool
    tolerance: float

    @property
    def convention(self):
        if self.pairwise:
            return "pairwise"
        if self.complete:
            return "complete"
        return "none"

    def to_dict(self):
        return {
            "pair_sums": {"+".join(k): v for k, v in self.pair_sums.items()},
            "pair_deviation_from_half": {"+".join(k): v - 0.5 for k, v in self.pair_sums.items()},
            "quadruple_sums": {"+".join(k): v for k, v in self.quadruple_sums.items()},
            "quadruple_deviation_from_one": {"+".join(k): v - 1.0 for k, v in self.quadruple_sums.items()},
            "convention": self.convention,
        }


def complete_groups(settings):
    """Every complete product-basis quadruple whose four settings are all present."""
    present = set(settings)
    bases = sorted({tuple(sorted((a, b))) for a, b in ORTHOGONAL.items()})
    groups = []
    for b1, b2 in itertools.product(bases, repeat=2):
        quad = tuple(x + y for x in b1 for y in b2)
        if present.issuperset(quad):
            groups.append(quad)
    return groups


def group_sum(ms, settings):
    return float(sum(ms.get(s).p for s in settings))


def check_complete_normalization(ms, pairs=DEFAULT_PAIRS, tol=1e-5):
    missing = {s for pair in pairs for s in pair} - set(ms.settings)
    if missing:
        raise MissingSettings(missing)
    pair_sums = {tuple(pair): group_sum(ms, pair) for pair in pairs}
    quad_sums = {g: group_sum(ms, g) for g in complete_groups(ms.settings)}
    return NormalizationReport(
        pair_sums=pair_sums,
        quadruple_sums=quad_sums,
        pairwise=all(abs(v - 0.5) <= tol for v in pair_sums.values()),
        complete=bool(quad_sums) and all(abs(v - 1.0) <= tol for v in quad_sums.values()),
        tolerance=tol,
    )
