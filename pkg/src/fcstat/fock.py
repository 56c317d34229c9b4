"""Brute-force Fock-space validator.

Everything here works on the full 2^M-dimensional antisymmetric Fock
space: operator lifts Gamma(A) (matrix elements are minors of A) and
dGamma(A) (one-body action with fermionic signs), quasi-free states as
normalised Gamma(M) or explicit Slater vectors, and the generating
function evaluated directly as a Fock-space trace.  The code is
deliberately plain and shares nothing with the determinant engine beyond
the dense linear algebra kernel - independence is the point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import ContractError, HypothesisViolationError, NumericalIntegrityError
from .fcs import ChargeDistribution

MAX_MODES = 14
OMEGA_MAX_MODES = 10
COMMUTATION_GATE = 1e-10


@dataclass(frozen=True)
class FockBasis:
    """Occupation bitmasks for M modes, in increasing integer order.

    Bit i of a state mask marks mode i occupied; the reference ordering of
    creation operators inside a basis vector is ascending mode index.
    """

    modes: int

    def __post_init__(self):
        if not 1 <= self.modes <= MAX_MODES:
            raise ContractError(
                f"mode count must lie in 1..{MAX_MODES}, got {self.modes}")

    @property
    def size(self) -> int:
        return 1 << self.modes

    @property
    def states(self) -> np.ndarray:
        return np.arange(self.size, dtype=np.uint32)

    def popcounts(self) -> np.ndarray:
        return np.array([int(s).bit_count() for s in range(self.size)])

    def occupied(self, state: int) -> tuple[int, ...]:
        return tuple(i for i in range(self.modes) if (state >> i) & 1)


def _sign_below(state: int, mode: int) -> int:
    """Fermionic sign from anticommuting past the modes below ``mode``."""
    return -1 if (int(state) & ((1 << mode) - 1)).bit_count() % 2 else 1


def gamma(a: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Multiplicative lift of a one-particle operator to Fock space.

    Matrix elements between equal particle numbers are minors of ``a``
    on the occupied rows and columns; the vacuum maps to the vacuum and
    Gamma(AB) = Gamma(A) Gamma(B).
    """
    a = linalg.as_square(a, "one-particle operator")
    m = basis.modes
    if a.shape[0] != m:
        raise ContractError(f"operator dimension {a.shape[0]} != modes {m}")
    occ = [basis.occupied(s) for s in range(basis.size)]
    pops = basis.popcounts()
    out = np.zeros((basis.size, basis.size), dtype=complex)
    out[0, 0] = 1.0
    for k in range(1, m + 1):
        sector = np.flatnonzero(pops == k)
        rows = np.array([occ[s] for s in sector])
        # All minors of one sector in a single batched determinant.
        sub = a[rows[:, None, :, None], rows[None, :, None, :]]
        out[np.ix_(sector, sector)] = np.linalg.det(sub)
    return out


def dgamma(a: np.ndarray, basis: FockBasis) -> np.ndarray:
    """Additive lift: sum over modes of A_ij a^dag_i a_j with fermi signs."""
    a = linalg.as_square(a, "one-particle operator")
    m = basis.modes
    if a.shape[0] != m:
        raise ContractError(f"operator dimension {a.shape[0]} != modes {m}")
    out = np.zeros((basis.size, basis.size), dtype=complex)
    for s in range(basis.size):
        for j in range(m):
            if not (s >> j) & 1:
                continue
            s1 = s & ~(1 << j)
            sgn1 = _sign_below(s, j)
            for i in range(m):
                if (s1 >> i) & 1:
                    continue
                t = s1 | (1 << i)
                out[t, s] += a[i, j] * sgn1 * _sign_below(s1, i)
    return out


@dataclass(frozen=True)
class GibbsState:
    """A (possibly pure) quasi-free Fock-space state.

    ``operator`` is the 2^M density matrix, ``weight_matrix`` the
    one-particle weight when the state is Gamma(M)/Z (None for Slater
    vectors), ``reduced_density`` the one-particle density matrix N.
    """

    operator: np.ndarray
    reduced_density: np.ndarray
    weight_matrix: np.ndarray | None
    pure: bool

    def __post_init__(self):
        tr = complex(np.trace(self.operator))
        if abs(tr - 1.0) > 1e-10:
            raise NumericalIntegrityError(f"state trace {tr:.12g} is not 1")
        w = np.linalg.eigvalsh((self.operator + self.operator.conj().T) / 2.0)
        if w.min() < -1e-10:
            raise NumericalIntegrityError(
                f"state has negative weight {w.min():.3e}")


def gibbs_state(weight: np.ndarray, basis: FockBasis) -> GibbsState:
    """Normalised multiplicative state Gamma(weight) / det(1 + weight)."""
    weight = linalg.check_hermitian(weight, "weight", rtol=1e-10)
    wvals = np.linalg.eigvalsh(weight)
    if wvals.size and wvals.min() < -1e-10 * (1.0 + linalg.max_abs(weight)):
        raise ContractError(
            f"weight must be positive semidefinite, min eigenvalue {wvals.min():.3e}")
    z = linalg.determinant(np.eye(basis.modes) + weight).real
    if z < 1e-300:
        raise ContractError(f"partition function underflow: det(1+M) = {z:.3e}")
    op = gamma(weight, basis) / z
    reduced = np.linalg.solve(np.eye(basis.modes) + weight, weight)
    reduced = (reduced + reduced.conj().T) / 2.0
    return GibbsState(operator=op, reduced_density=reduced,
                      weight_matrix=weight, pure=False)


def slater_state(orbitals: np.ndarray, basis: FockBasis) -> GibbsState:
    """Pure Fermi-sea state from orthonormal occupied orbitals (columns).

    The Fock vector carries amplitude det(orbitals[rows of S, :]) on each
    occupation S of matching particle number.
    """
    v = np.asarray(orbitals, dtype=complex)
    if v.ndim != 2 or v.shape[0] != basis.modes:
        raise ContractError("orbitals must be a modes x k matrix")
    k = v.shape[1]
    if k and linalg.max_abs(v.conj().T @ v - np.eye(k)) > 1e-10:
        raise ContractError("occupied orbitals must be orthonormal")
    psi = np.zeros(basis.size, dtype=complex)
    if k == 0:
        psi[0] = 1.0
    else:
        pops = basis.popcounts()
        for s in np.flatnonzero(pops == k):
            psi[s] = np.linalg.det(v[basis.occupied(int(s)), :])
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-10:
        raise NumericalIntegrityError(f"Slater vector norm {norm:.12g} is not 1")
    reduced = v @ v.conj().T
    return GibbsState(operator=np.outer(psi, psi.conj()),
                      reduced_density=reduced, weight_matrix=None, pure=True)


def state_from_occupation(n: np.ndarray, basis: FockBasis) -> GibbsState:
    """State whose one-particle density matrix is ``n``.

    Projections become Slater vectors; strictly mixed occupations go
    through the weight form with M = N (1 - N)^{-1}.
    """
    n = linalg.check_hermitian(n, "occupation", rtol=1e-10)
    if linalg.max_abs(n @ n - n) <= 1e-8:
        w, v = linalg.hermitian_eig(n)
        return slater_state(v[:, w > 0.5], basis)
    w, v = linalg.hermitian_eig(n)
    if w.min() < 1e-14 or w.max() > 1.0 - 1e-14:
        raise ContractError(
            "occupation eigenvalues too close to {0,1} for the weight form; "
            "use a pure state instead")
    m = (v * (w / (1.0 - w))) @ v.conj().T
    return gibbs_state((m + m.conj().T) / 2.0, basis)


def _phase_of_hermitian_lift(a_lifted: np.ndarray, lam: float) -> np.ndarray:
    w, v = linalg.hermitian_eig(a_lifted)
    return (v * np.exp(1j * lam * w)) @ v.conj().T


class FockOracle:
    """Prepared brute-force evaluator for one scenario.

    Caches Gamma(U) and the spectral data of dGamma(Q) so that a grid of
    counting phases costs one lift, not one per sample.
    """

    def __init__(self, u: np.ndarray, q: np.ndarray, state: GibbsState,
                 basis: FockBasis):
        self.basis = basis
        self.u = linalg.check_unitary(np.asarray(u, dtype=complex), "evolution")
        self.q = linalg.check_projection(np.asarray(q, dtype=complex), "charge")
        self.state = state
        comm = linalg.max_abs(self.q @ state.reduced_density
                              - state.reduced_density @ self.q)
        if comm > COMMUTATION_GATE:
            raise HypothesisViolationError(
                f"charge is not a good quantum number: ||[Q, N]|| = {comm:.3e}")
        self.gamma_u = gamma(self.u, basis)
        dq = dgamma(self.q, basis)
        diag = np.diag(np.diag(dq))
        if linalg.max_abs(dq - diag) <= 1e-14:
            self._q_eigvals = np.diag(dq).real
            self._q_eigvecs = None
        else:
            w, v = linalg.hermitian_eig(dq)
            self._q_eigvals, self._q_eigvecs = w, v

    def _counting_phase(self, lam: float) -> np.ndarray:
        phase = np.exp(1j * lam * self._q_eigvals)
        if self._q_eigvecs is None:
            return np.diag(phase)
        v = self._q_eigvecs
        return (v * phase) @ v.conj().T

    def chi(self, lam: float) -> complex:
        ep = self._counting_phase(lam)
        em = self._counting_phase(-lam)
        val = complex(np.trace(
            self.gamma_u.conj().T @ ep @ self.gamma_u @ em @ self.state.operator))
        if abs(val) > 1.0 + 1e-9:
            raise NumericalIntegrityError(
                f"|chi({lam:.6g})| = {abs(val):.12g} exceeds 1")
        return val

    def chi_samples(self, grid_size: int) -> np.ndarray:
        lams = 2.0 * np.pi * np.arange(grid_size) / grid_size
        return np.array([self.chi(lam) for lam in lams])

    def distribution(self) -> ChargeDistribution:
        """Transfer probabilities from projective charge measurements.

        Works in a mode basis that diagonalises the state blockwise within
        the charge eigenspaces, so the initial weights factorise over
        modes and every probability is a sum of squared amplitudes.
        """
        m = self.basis.modes
        qw, qv = linalg.hermitian_eig(self.q)
        qbits = np.round(qw.real).astype(int)
        n_rot = linalg.conjugate_by(qv, self.state.reduced_density)
        rot = np.zeros((m, m), dtype=complex)
        nu = np.zeros(m)
        for bit in (0, 1):
            idx = np.flatnonzero(qbits == bit)
            if idx.size == 0:
                continue
            wb, vb = linalg.hermitian_eig(n_rot[np.ix_(idx, idx)])
            rot[np.ix_(idx, idx)] = vb
            nu[idx] = np.clip(wb.real, 0.0, 1.0)
        modes = qv @ rot  # columns: charge-definite natural orbitals
        u_rot = linalg.conjugate_by(modes, self.u)
        gam = gamma(u_rot, self.basis)

        pops = self.basis.popcounts()
        charge_of = np.array([
            sum(qbits[i] for i in self.basis.occupied(s))
            for s in range(self.basis.size)])
        if self.state.pure:
            occupied = np.flatnonzero(nu > 0.5)
            weights = {int(np.bitwise_or.reduce(1 << occupied, initial=0)): 1.0}
        else:
            weights = {}
            for s in range(self.basis.size):
                mask = np.array([(s >> i) & 1 for i in range(m)], dtype=bool)
                weights[s] = float(np.prod(nu[mask]) * np.prod(1.0 - nu[~mask]))
        probs = np.zeros(2 * m + 1)
        for s, rho in weights.items():
            if rho == 0.0:
                continue
            sector = np.flatnonzero(pops == pops[s])
            p_t = np.abs(gam[sector, s]) ** 2
            np.add.at(probs, m + charge_of[sector] - charge_of[s], rho * p_t)
        return ChargeDistribution(n_min=-m, raw=probs)


def chi_bruteforce(u: np.ndarray, q: np.ndarray, state: GibbsState,
                   lam: float, basis: FockBasis) -> complex:
    """chi(lam) as the Fock-space trace of the conjugated counting phases."""
    return FockOracle(u, q, state, basis).chi(lam)


def distribution_bruteforce(u: np.ndarray, q: np.ndarray, state: GibbsState,
                            basis: FockBasis) -> ChargeDistribution:
    """Transfer distribution by enumerating measurement outcomes."""
    return FockOracle(u, q, state, basis).distribution()


def trdet_identity_check(a: np.ndarray, state: GibbsState, lam: float,
                         basis: FockBasis) -> float:
    """|Tr(e^{i lam dGamma(A)} P) - det(1 - N + e^{i lam A} N)|."""
    a = linalg.check_hermitian(a, "generator")
    lifted = dgamma(a, basis)
    lhs = complex(np.trace(_phase_of_hermitian_lift(lifted, lam)
                           @ state.operator))
    n = state.reduced_density
    rhs = linalg.determinant(np.eye(basis.modes) - n
                             + linalg.phase_exp(a, lam) @ n)
    return abs(lhs - rhs)


def omega_gamma_check(u: np.ndarray, n: np.ndarray) -> float:
    """|Tr(Gamma(U) P_N) - det(1 - N + U N)| for the quasi-free state of N."""
    u = linalg.check_unitary(np.asarray(u, dtype=complex), "evolution")
    modes = u.shape[0]
    if modes > OMEGA_MAX_MODES:
        raise ContractError(
            f"mode count {modes} exceeds the {OMEGA_MAX_MODES}-mode gate")
    basis = FockBasis(modes)
    state = state_from_occupation(n, basis)
    lhs = complex(np.trace(gamma(u, basis) @ state.operator))
    rhs = linalg.determinant(np.eye(modes) - state.reduced_density
                             + u @ state.reduced_density)
    return abs(lhs - rhs)
