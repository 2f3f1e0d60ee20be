"""Entanglement, purity and single-photon polarization measures."""

from dataclasses import asdict, dataclass

import numpy as np

from . import eigen
from .errors import DegenerateDenominator, DimensionMismatch, OutOfRange
from .qstate import SIGMA_X, SIGMA_Y, SIGMA_Z, SPIN_FLIP, as_matrix, linear_entropy, partial_trace, partial_transpose

MUNRO_BOUND = 8.0 / 9.0
PERES_TOL = 1e-9
DEFAULT_DOP_THRESHOLD = 0.01
# Concurrences below this are roundoff of an exactly separable state.
CONCURRENCE_FLOOR = 1e-12


@dataclass(frozen=True)
class ConcurrenceBreakdown:
    lambdas: tuple


@dataclass(frozen=True)
class StokesVector:
    s1: float
    s2: float
    s3: float

    @property
    def length(self):
        return float(np.sqrt(self.s1**2 + self.s2**2 + self.s3**2))


@dataclass(frozen=True)
class MetricsReport:
    tangle: float
    concurrence: float
    eof: float
    linear_entropy: float
    peres_min_eigenvalue: float
    largest_eigenvalue: float
    dop_photon1: float
    dop_photon2: float
    eigen_method_valid: bool
    munro_bound_applies: bool
    lambdas: tuple
    dop_threshold: float = DEFAULT_DOP_THRESHOLD

    def to_dict(self):
        d = asdict(self)
        d["lambdas"] = list(self.lambdas)
        return d


def _as_two_qubit(rho):
    m = as_matrix(rho)
    if m.shape[-2:] != (4, 4):
        raise DimensionMismatch(f"expected 4x4 matrices, got {m.shape}")
    return m


def wootters_lambdas(rho):
    """Square roots of the eigenvalues of rho * rho~, descending, for a state or a stack.

    Computed as singular values of ``W^T (sy x sy) W`` with ``rho = W W^H``,
    which stays accurate for rank-deficient states.
    """
    m = _as_two_qubit(rho)
    w, v = eigen.eigh(m)
    w = np.clip(w, 0.0, None)
    root = v * np.sqrt(w)[..., None, :]
    tau = np.swapaxes(root, -1, -2) @ SPIN_FLIP @ root
    return np.linalg.svd(tau, compute_uv=False)


def concurrence_values(rho):
    lam = wootters_lambdas(rho)
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    c = np.where(c > CONCURRENCE_FLOOR, c, 0.0)
    return np.minimum(c, 1.0), lam


def concurrence(rho):
    """Wootters concurrence and its lambda breakdown."""
    c, lam = concurrence_values(rho)
    return float(c), ConcurrenceBreakdown(tuple(float(x) for x in lam))


def tangle(rho):
    c, _ = concurrence_values(rho)
    return c**2 if np.ndim(c) else float(c) ** 2


def binary_entropy(x):
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise OutOfRange(f"binary entropy needs x in [0, 1], got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def entanglement_of_formation(t):
    """Entanglement of formation from the tangle."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise OutOfRange(f"tangle must be in [0, 1], got {t}")
    return binary_entropy((1.0 + np.sqrt(1.0 - t)) / 2.0)


def peres_min_eigenvalue(rho):
    return eigen.eigvalsh(partial_transpose(_as_two_qubit(rho), "photon2"))[..., 0]


def peres_test(rho):
    """Minimum eigenvalue of the partial transpose and the PPT verdict."""
    lmin = float(peres_min_eigenvalue(rho))
    return lmin, lmin < -PERES_TOL


def _single_photon(rho):
    m = as_matrix(rho)
    if m.shape[-2:] != (2, 2):
        raise DimensionMismatch(f"expected 2x2 single-photon matrices, got {m.shape}")
    return m


def degree_of_polarization(rho):
    """sqrt(1 - 4 det rho) for a single-photon state (scalar or stack)."""
    m = _single_photon(rho)
    det = (m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]).real
    tr = (m[..., 0, 0] + m[..., 1, 1]).real
    # divide by tr^2 so unnormalized inputs still give a DOP
    val = np.sqrt(np.clip(1.0 - 4.0 * det / tr**2, 0.0, 1.0))
    return float(val) if np.ndim(val) == 0 else val


def stokes_vector(rho):
    """Normalized Stokes components (H-V, D-A, L-R)."""
    m = _single_photon(rho)
    tr = np.trace(m).real
    s = [float(np.trace(m @ p).real / tr) for p in (SIGMA_Z, SIGMA_X, SIGMA_Y)]
    return StokesVector(*s)


def photon_dops(rho):
    m = _as_two_qubit(rho)
    return degree_of_polarization(partial_trace(m, "photon1")), degree_of_polarization(partial_trace(m, "photon2"))


def eigenvalue_method(rho, dop_threshold=DEFAULT_DOP_THRESHOLD):
    """Largest eigenvalue test, valid only when both photons are unpolarized.

    Returns ``(largest_eigenvalue, valid, indicates_entanglement)``.
    """
    if dop_threshold <= 0:
        raise OutOfRange("dop_threshold must be positive")
    m = _as_two_qubit(rho)
    lmax = float(eigen.eigvalsh(m)[-1])
    d1, d2 = photon_dops(m)
    valid = bool(d1 <= dop_threshold and d2 <= dop_threshold)
    return lmax, valid, bool(valid and lmax > 0.5)


def polarizer_ket(theta):
    return np.array([np.cos(theta), np.sin(theta)], dtype=complex)


def degree_of_correlation(rho, theta):
    """(N(t, t) - N(t, t + pi/2)) / (N(t, t) + N(t, t + pi/2)) from Born probabilities."""
    m = _as_two_qubit(rho)
    a = polarizer_ket(theta)
    b = polarizer_ket(theta + np.pi / 2)
    par = np.kron(a, a)
    perp = np.kron(a, b)
    n_par = np.einsum("i,...ij,j->...", np.conj(par), m, par).real
    n_perp = np.einsum("i,...ij,j->...", np.conj(perp), m, perp).real
    den = n_par + n_perp
    if np.any(np.abs(den) < 1e-15):
        raise DegenerateDenominator(f"no coincidences at theta={theta}")
    val = (n_par - n_perp) / den
    return float(val) if np.ndim(val) == 0 else val


def metrics_report(rho, dop_threshold=DEFAULT_DOP_THRESHOLD):
    m = _as_two_qubit(rho)
    c, br = concurrence(m)
    t = c * c
    sl = float(linear_entropy(m))
    lmax, valid, _ = eigenvalue_method(m, dop_threshold)
    d1, d2 = photon_dops(m)
    return MetricsReport(
        tangle=t,
        concurrence=c,
        eof=entanglement_of_formation(t),
        linear_entropy=sl,
        peres_min_eigenvalue=float(peres_min_eigenvalue(m)),
        largest_eigenvalue=lmax,
        dop_photon1=float(d1),
        dop_photon2=float(d2),
        eigen_method_valid=valid,
        munro_bound_applies=sl > MUNRO_BOUND,
        lambdas=br.lambdas,
        dop_threshold=float(dop_threshold),
    )
