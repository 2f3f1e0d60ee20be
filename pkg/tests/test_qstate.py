import numpy as np
import pytest

from polartomo import qstate as Q
from polartomo.errors import DimensionMismatch, NegativeEigenvalue, NotHermitian, TraceNotOne

from conftest import RHO3D

H = np.array([[1, 0], [0, 0]], dtype=complex)
V = np.array([[0, 0], [0, 1]], dtype=complex)


class TestValidation:
    def test_maximally_mixed_is_valid(self):
        rho = Q.validate_density_matrix(np.eye(4) / 4)
        assert rho.basis == ("HH", "HV", "VH", "VV")

    def test_published_matrix_is_valid(self):
        rho = Q.validate_density_matrix(RHO3D)
        assert np.min(rho.eigenvalues()) > 0

    def test_negative_eigenvalue_carries_value(self):
        with pytest.raises(NegativeEigenvalue) as exc:
            Q.validate_density_matrix(np.diag([1.2, -0.2, 0, 0]))
        assert exc.value.value == pytest.approx(-0.2, abs=1e-15)

    def test_not_hermitian(self):
        m = np.eye(4, dtype=complex) / 4
        m[0, 1] = 0.1
        with pytest.raises(NotHermitian):
            Q.validate_density_matrix(m)

    def test_trace(self):
        with pytest.raises(TraceNotOne):
            Q.validate_density_matrix(np.eye(4) / 2)

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            Q.validate_density_matrix(np.eye(3) / 3)

    def test_roundoff_negative_accepted(self):
        m = np.diag([0.5, 0.5, -1e-12, 1e-12])
        Q.validate_density_matrix(m)

    def test_immutable(self):
        rho = Q.maximally_mixed()
        with pytest.raises(ValueError):
            rho.matrix[0, 0] = 1


class TestTensor:
    def test_identity(self):
        assert np.array_equal(Q.tensor(np.eye(2), np.eye(2)), np.eye(4))

    def test_basis_order(self):
        out = Q.tensor(H, V)
        expected = np.zeros((4, 4))
        expected[1, 1] = 1
        assert np.array_equal(out, expected)

    def test_spin_flip_involution(self, rng):
        for rho in Q.random_density_matrices(rng, 20):
            flipped = Q.SPIN_FLIP @ rho.conj() @ Q.SPIN_FLIP
            back = Q.SPIN_FLIP @ flipped.conj() @ Q.SPIN_FLIP
            assert np.allclose(back, rho, atol=1e-15)

    def test_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Q.tensor(np.eye(4), np.eye(2))


class TestPartialTrace:
    @pytest.mark.parametrize("keep", ["photon1", "photon2"])
    def test_bell_marginals(self, keep):
        rho = Q.bell_state("phi+").density_matrix()
        assert np.allclose(Q.partial_trace(rho, keep).matrix, np.eye(2) / 2, atol=1e-15)

    def test_published_photon2(self):
        # Oracle: entry sums over photon 1, from the published entries.
        m = RHO3D
        expected = np.array([[m[0, 0] + m[2, 2], m[0, 1] + m[2, 3]], [m[1, 0] + m[3, 2], m[1, 1] + m[3, 3]]])
        got = Q.partial_trace(Q.validate_density_matrix(m), "photon2").matrix
        assert np.allclose(got, expected, atol=1e-15)
        assert got[0, 0].real == pytest.approx(0.5214, abs=1e-12)
        assert got[0, 1] == pytest.approx(0.0009 + 0.0067j, abs=1e-12)

    def test_published_photon1_is_unpolarized(self):
        got = Q.partial_trace(RHO3D, "photon1")
        assert np.allclose(got, np.eye(2) / 2, atol=1e-12)

    def test_product_factorization(self, rng):
        a = Q.random_density_matrices(rng, 30, dim=2)
        b = Q.random_density_matrices(rng, 30, dim=2)
        for x, y in zip(a, b):
            prod = Q.tensor(x, y)
            assert np.allclose(Q.partial_trace(prod, "photon1"), x, atol=1e-14)
            assert np.allclose(Q.partial_trace(prod, "photon2"), y, atol=1e-14)

    def test_stack(self, rng):
        rho = Q.random_density_matrices(rng, 5)
        out = Q.partial_trace(rho, "photon2")
        assert out.shape == (5, 2, 2)
        assert np.allclose(out[3], Q.partial_trace(rho[3], "photon2"))


class TestPartialTranspose:
    def test_mixed_invariant(self):
        assert np.array_equal(Q.partial_transpose(np.eye(4) / 4), np.eye(4) / 4)

    def test_bell_min_eigenvalue(self):
        pt = Q.partial_transpose(Q.bell_state("phi+").projector())
        # Oracle: hand-written partial transpose of |Phi+><Phi+|.
        hand = 0.5 * np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
        assert np.allclose(pt, hand)
        assert np.linalg.eigvalsh(hand)[0] == pytest.approx(-0.5)

    @pytest.mark.parametrize("sub", ["photon1", "photon2"])
    def test_involution_trace_hermiticity(self, rng, sub):
        for rho in Q.random_density_matrices(rng, 20):
            pt = Q.partial_transpose(rho, sub)
            assert np.array_equal(Q.partial_transpose(pt, sub), rho)
            assert abs(np.trace(pt) - np.trace(rho)) <= 1e-12
            assert np.max(np.abs(pt - pt.conj().T)) <= 1e-12

    def test_photon1_and_photon2_agree_up_to_full_transpose(self, rng):
        rho = Q.random_density_matrices(rng, 1)[0]
        assert np.allclose(Q.partial_transpose(rho, "photon1"), Q.partial_transpose(rho, "photon2").T)


class TestLinearEntropy:
    def test_pure_zero(self, rng):
        for psi in Q.random_unitaries(rng, 5, dim=4)[:, :, 0]:
            assert Q.linear_entropy(np.outer(psi, psi.conj())) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed_one(self):
        assert Q.linear_entropy(np.eye(4) / 4) == pytest.approx(1.0, abs=1e-15)

    def test_published_value(self):
        # Oracle: Tr rho^2 as the sum of squared moduli of the published entries.
        oracle = 4 / 3 * (1 - np.sum(np.abs(RHO3D) ** 2))
        sl = Q.linear_entropy(RHO3D)
        assert sl == pytest.approx(oracle, abs=1e-12)
        assert sl == pytest.approx(0.942, abs=0.005)
        assert 0.92 <= sl <= 0.99

    def test_local_unitary_invariance(self, rng):
        rho = Q.random_density_matrices(rng, 50)
        u1 = Q.random_unitaries(rng, 50)
        u2 = Q.random_unitaries(rng, 50)
        u = np.einsum("nij,nkl->nikjl", u1, u2).reshape(50, 4, 4)
        rotated = u @ rho @ np.conj(np.swapaxes(u, -1, -2))
        assert np.max(np.abs(Q.linear_entropy(rotated) - Q.linear_entropy(rho))) <= 1e-8

    def test_range(self, rng):
        sl = Q.linear_entropy(Q.random_density_matrices(rng, 200))
        assert np.all((sl >= -1e-9) & (sl <= 1 + 1e-9))


class TestFidelityAndBell:
    def test_self_fidelity(self):
        phi = Q.bell_state("phi+")
        assert Q.fidelity_pure(phi.projector(), phi) == pytest.approx(1.0)

    def test_mixed_overlap(self):
        assert Q.fidelity_pure(np.eye(4) / 4, Q.bell_state("phi+")) == pytest.approx(0.25)

    def test_published_overlap(self):
        # Oracle: <Phi+|rho|Phi+> = (rho00 + rho33 + 2 Re rho03) / 2
        oracle = 0.5 * (RHO3D[0, 0] + RHO3D[3, 3] + 2 * RHO3D[0, 3].real).real
        f = Q.fidelity_pure(RHO3D, Q.bell_state("phi+"))
        assert f == pytest.approx(oracle, abs=1e-12)
        assert 0 <= f <= 1

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            Q.fidelity_pure(np.eye(2) / 2, Q.bell_state("phi+"))

    def test_bell_vectors(self):
        s = 1 / np.sqrt(2)
        assert np.allclose(Q.bell_state("phi+").amplitudes, [s, 0, 0, s])
        assert np.allclose(Q.bell_state("psi+").amplitudes, [0, s, s, 0])
        assert np.allclose(Q.bell_state("Ψ⁻").amplitudes, [0, s, -s, 0])

    @pytest.mark.parametrize("kind", ["phi+", "phi-", "psi+", "psi-"])
    def test_unit_norm(self, kind):
        assert np.linalg.norm(Q.bell_state(kind).amplitudes) == pytest.approx(1.0, abs=1e-15)

    def test_unknown(self):
        with pytest.raises(ValueError):
            Q.bell_state("ghz")
