import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

from fcstat import linalg
from fcstat.errors import ContractError

from helpers import cofactor_det, expm_taylor, random_complex, random_hermitian, \
    random_projection, random_unitary


class TestHermitianEig:
    def test_diagonal_input(self):
        w, _ = linalg.hermitian_eig(np.diag([3.0, 1.0, 2.0]).astype(complex))
        assert w == approx([1.0, 2.0, 3.0])

    def test_identity(self):
        w, v = linalg.hermitian_eig(np.eye(4, dtype=complex))
        assert w == approx(np.ones(4))
        assert linalg.max_abs(v.conj().T @ v - np.eye(4)) < 1e-10

    def test_reconstruction_oracle(self, rng):
        a = random_hermitian(rng, 6)
        w, v = linalg.hermitian_eig(a)
        assert linalg.max_abs((v * w) @ v.conj().T - a) < 1e-10
        assert np.all(np.diff(w) >= 0)

    def test_rejects_non_hermitian(self, rng):
        with pytest.raises(ContractError):
            linalg.hermitian_eig(random_complex(rng, 4))


class TestUnitaryExp:
    def test_zero_time_is_identity(self, rng):
        u = linalg.unitary_exp(random_hermitian(rng, 5), 0.0)
        assert linalg.max_abs(u - np.eye(5)) < 1e-12

    def test_scalar_pi(self):
        u = linalg.unitary_exp(np.array([[np.pi]], dtype=complex), 1.0)
        assert u[0, 0] == approx(-1.0)

    def test_against_taylor_squaring_oracle(self, rng):
        a = random_hermitian(rng, 5)
        assert linalg.max_abs(linalg.unitary_exp(a, 0.7) - expm_taylor(a, 0.7)) < 1e-9


class TestDeterminant:
    def test_identity(self):
        assert linalg.determinant(np.eye(7, dtype=complex)) == approx(1.0)

    def test_diagonal(self):
        assert linalg.determinant(np.diag([2.0, 3.0j])) == approx(6.0j)

    def test_against_cofactor_oracle(self, rng):
        a = random_complex(rng, 5)
        expected = cofactor_det(a)
        assert abs(linalg.determinant(a) - expected) < 1e-10 * abs(expected)

    def test_singular_returns_zero(self):
        a = np.ones((3, 3), dtype=complex)
        assert linalg.determinant(a) == 0.0


class TestSingularValues:
    def test_projection_rank_three(self, rng):
        p = random_projection(rng, 5, 3)
        s = linalg.singular_values(p)
        assert s == approx([1.0, 1.0, 1.0, 0.0, 0.0], abs=1e-10)

    def test_sign_is_dropped(self):
        assert linalg.singular_values(np.diag([-4.0, 3.0])) == approx([4.0, 3.0])

    def test_frobenius_identity_oracle(self, rng):
        a = random_complex(rng, 4, 6)
        s = linalg.singular_values(a)
        assert np.sum(s ** 2) == approx(np.sum(np.abs(a) ** 2), abs=1e-10)
        assert len(s) == 4


class TestSchattenNorm:
    def test_projection_trace_norm_is_rank(self, rng):
        p = random_projection(rng, 6, 4)
        assert linalg.schatten_norm(p, 1) == approx(4.0)

    def test_diagonal(self):
        assert linalg.schatten_norm(np.diag([3.0, -4.0]), 1) == approx(7.0)

    def test_p2_is_frobenius(self, rng):
        a = random_complex(rng, 5)
        assert linalg.schatten_norm(a, 2) == approx(np.linalg.norm(a), abs=1e-12)

    def test_rejects_p_below_one(self, rng):
        with pytest.raises(ContractError):
            linalg.schatten_norm(random_complex(rng, 3), 0.5)


class TestConjugateBy:
    def test_identity_operand(self, rng):
        u = random_unitary(rng, 4)
        assert linalg.max_abs(linalg.conjugate_by(u, np.eye(4)) - np.eye(4)) < 1e-12

    def test_identity_frame(self, rng):
        a = random_complex(rng, 4)
        assert linalg.max_abs(linalg.conjugate_by(np.eye(4, dtype=complex), a) - a) == 0

    def test_spectrum_invariance_oracle(self, rng):
        a = random_hermitian(rng, 5)
        u = random_unitary(rng, 5)
        wa = np.linalg.eigvalsh(a)
        wb = np.linalg.eigvalsh(linalg.conjugate_by(u, a))
        assert wb == approx(wa, abs=1e-10)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ContractError):
            linalg.conjugate_by(random_unitary(rng, 3), random_complex(rng, 4))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 6), rank=st.integers(1, 5), seed=st.integers(0, 2**32 - 1),
       lam=st.floats(-7.0, 7.0))
def test_projection_phase_identity(n, rank, seed, lam):
    # exp(i lam P) for a projection equals 1 + (e^{i lam} - 1) P entrywise
    rng = np.random.default_rng(seed)
    p = random_projection(rng, n, min(rank, n))
    direct = linalg.phase_exp((p + p.conj().T) / 2.0, lam)
    assert linalg.max_abs(direct - linalg.phase_on_projection(p, lam)) < 1e-12


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_determinant_is_multiplicative(n, seed):
    rng = np.random.default_rng(seed)
    a, b = random_complex(rng, n), random_complex(rng, n)
    lhs = linalg.determinant(a @ b)
    rhs = linalg.determinant(a) * linalg.determinant(b)
    assert abs(lhs - rhs) <= 1e-9 * (1.0 + abs(rhs))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_trace_norm_dominates_trace(n, seed):
    rng = np.random.default_rng(seed)
    a = random_complex(rng, n)
    assert linalg.schatten_norm(a, 1) >= abs(np.trace(a)) - 1e-10


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 6), seed=st.integers(0, 2**32 - 1),
       p=st.sampled_from([1.0, 2.0, 4.0]))
def test_conjugation_preserves_schatten_norms(n, seed, p):
    rng = np.random.default_rng(seed)
    a = random_complex(rng, n)
    u = random_unitary(rng, n)
    before = linalg.schatten_norm(a, p)
    after = linalg.schatten_norm(linalg.conjugate_by(u, a), p)
    assert after == approx(before, rel=1e-10)
