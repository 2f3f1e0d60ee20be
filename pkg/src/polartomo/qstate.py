"""Two-qubit polarization states.

Basis order for two photons is fixed to ``[HH, HV, VH, VV]`` (first letter
photon 1).  Functions accept either a :class:`DensityMatrix` or a plain
ndarray; ndarray inputs may be stacks of shape ``(..., d, d)``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import eigen
from .errors import DimensionMismatch, NegativeEigenvalue, NotHermitian, TraceNotOne

BASIS_2Q = ("HH", "HV", "VH", "VV")
BASIS_1Q = ("H", "V")
DEFAULT_TOL = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)


def _dagger(m):
    return np.conj(np.swapaxes(m, -1, -2))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated, immutable density matrix (2x2 or 4x4)."""

    matrix: np.ndarray
    basis: tuple = field(default=None)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.basis is None:
            object.__setattr__(self, "basis", BASIS_2Q if m.shape[0] == 4 else BASIS_1Q)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim}, basis={list(self.basis)})"

    def eigenvalues(self):
        return eigen.eigvalsh(self.matrix)

    def to_dict(self):
        return {
            "basis": list(self.basis),
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if a.size not in (2, 4):
            raise DimensionMismatch(f"pure state must have 2 or 4 amplitudes, got {a.size}")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > DEFAULT_TOL:
            raise ValueError(f"state is not normalized (norm {norm:.12g})")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def dim(self):
        return self.amplitudes.size

    def projector(self):
        return np.outer(self.amplitudes, np.conj(self.amplitudes))

    def density_matrix(self):
        return DensityMatrix(self.projector())


def as_matrix(rho):
    """Return the underlying complex ndarray without copying where possible."""
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, PureState):
        return rho.projector()
    return np.asarray(rho, dtype=complex)


def _check_square(m):
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4):
        raise DimensionMismatch(f"expected a 2x2 or 4x4 matrix, got shape {m.shape}")


def validate_density_matrix(m, tol=DEFAULT_TOL):
    """Check Hermiticity, unit trace and positivity, in that order.

    Raises the first violated condition, carrying the worst offending value.
    """
    m = as_matrix(m)
    _check_square(m)
    dev = np.max(np.abs(m - _dagger(m)))
    if dev > tol:
        raise NotHermitian(dev)
    tr = np.trace(m)
    if abs(tr - 1.0) > tol:
        raise TraceNotOne(tr)
    herm = 0.5 * (m + _dagger(m))
    wmin = eigen.eigvalsh(herm)[0]
    if wmin < -tol:
        raise NegativeEigenvalue(wmin)
    return DensityMatrix(herm)


def _trusted(m):
    """Wrap a matrix that is PSD by construction; only Hermitian symmetrization is applied."""
    return DensityMatrix(0.5 * (m + _dagger(m)))


def tensor(a, b):
    """Kronecker product of two 2x2 operators in the ``[HH, HV, VH, VV]`` ordering."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != (2, 2) or b.shape != (2, 2):
        raise DimensionMismatch(f"tensor expects two 2x2 matrices, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def _photon_index(which):
    key = str(which).lower().replace("_", "").replace(" ", "")
    if key in ("1", "photon1", "a"):
        return 1
    if key in ("2", "photon2", "b"):
        return 2
    raise ValueError(f"unknown subsystem {which!r}; use 'photon1' or 'photon2'")


def partial_trace(rho, keep):
    """Reduced single-photon state of the photon named by ``keep``."""
    m = as_matrix(rho)
    if m.shape[-2:] != (4, 4):
        raise DimensionMismatch(f"partial_trace expects 4x4 matrices, got {m.shape}")
    r = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    if _photon_index(keep) == 1:
        out = np.einsum("...ajbj->...ab", r)
    else:
        out = np.einsum("...iaib->...ab", r)
    return DensityMatrix(out) if isinstance(rho, DensityMatrix) else out


def partial_transpose(rho, subsystem="photon2"):
    m = as_matrix(rho)
    if m.shape[-2:] != (4, 4):
        raise DimensionMismatch(f"partial_transpose expects 4x4 matrices, got {m.shape}")
    r = m.reshape(m.shape[:-2] + (2, 2, 2, 2))
    if _photon_index(subsystem) == 1:
        r = np.swapaxes(r, -4, -2)
    else:
        r = np.swapaxes(r, -3, -1)
    return r.reshape(m.shape)


def purity(rho):
    m = as_matrix(rho)
    return np.einsum("...ij,...ji->...", m, m).real


def linear_entropy(rho):
    """Mixedness normalized so pure states give 0 and ``I/d`` gives 1."""
    m = as_matrix(rho)
    d = m.shape[-1]
    return d / (d - 1.0) * (1.0 - purity(m))


def fidelity_pure(rho, psi):
    """Overlap <psi|rho|psi> with a pure reference state."""
    m = as_matrix(rho)
    if not isinstance(psi, PureState):
        psi = PureState(psi)
    if m.shape[-1] != psi.dim:
        raise DimensionMismatch(f"state of dim {m.shape[-1]} vs reference of dim {psi.dim}")
    v = psi.amplitudes
    return np.einsum("i,...ij,j->...", np.conj(v), m, v).real


_BELL = {
    "phi+": (1, 0, 0, 1),
    "phi-": (1, 0, 0, -1),
    "psi+": (0, 1, 1, 0),
    "psi-": (0, 1, -1, 0),
}


def bell_state(kind="phi+"):
    key = kind.lower().replace("φ", "phi").replace("ψ", "psi").replace("⁺", "+").replace("⁻", "-")
    try:
        amps = np.array(_BELL[key], dtype=complex) / np.sqrt(2.0)
    except KeyError:
        raise ValueError(f"unknown Bell state {kind!r}") from None
    return PureState(amps)


def maximally_mixed(dim=4):
    return DensityMatrix(np.eye(dim, dtype=complex) / dim)


def werner_state(p):
    """p |Phi+><Phi+| + (1 - p) I/4."""
    return DensityMatrix(p * bell_state("phi+").projector() + (1.0 - p) * np.eye(4) / 4.0)


def random_density_matrices(rng, count, dim=4, rank=None):
    """Hilbert-Schmidt (rank = dim) or induced-measure random states, shape ``(count, dim, dim)``."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((count, dim, rank)) + 1j * rng.standard_normal((count, dim, rank))
    m = g @ _dagger(g)
    m /= np.trace(m, axis1=-2, axis2=-1).real[:, None, None]
    return 0.5 * (m + _dagger(m))


def random_unitaries(rng, count, dim=2):
    """Haar-random unitaries via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]
