"""Counting kernels, generating function samples, and charge statistics.

The generating function chi(lambda) of the transferred charge is a
determinant of a one-particle counting kernel.  Three kernel variants are
provided: the plain Levitov-Lesovik form, its regularized form (whose
deviation from the identity stays trace-class in the deep-sea limit), and
the reduced form valid for pure occupations.  At finite dimension all
three determinants agree; the distribution p_n is recovered from a
uniform lambda grid by inverse DFT.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import comb
from typing import Callable

import numpy as np

from . import linalg
from .errors import (ContractError, DistributionIntegrityError,
                     NumericalIntegrityError)
from .models import ChargeProjection, OccupationOperator, Scenario

VARIANTS = ("naive", "regularized", "zero_temperature")

CHI_AT_ZERO_GATE = 1e-10
CONJUGATE_SYMMETRY_GATE = 1e-9
RESIDUE_ERROR_GATE = 1e-7
NORMALISATION_GATE = 1e-9
MEAN_IMAG_GATE = 1e-10


@dataclass(frozen=True)
class CountingKernel:
    """A counting kernel at one value of the counting phase lambda."""

    lam: float
    matrix: np.ndarray
    variant: str
    trace_norm_minus_identity: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def determinant(self) -> complex:
        return linalg.determinant(self.matrix)


def _hermitian_product(n: np.ndarray, q: np.ndarray, label: str) -> np.ndarray:
    """N @ Q for commuting Hermitian factors, symmetrised and gated."""
    prod = n @ q
    defect = linalg.max_abs(prod - prod.conj().T)
    if defect > 1e-10 * (1.0 + linalg.max_abs(prod)):
        raise NumericalIntegrityError(
            f"{label} is not Hermitian (defect {defect:.3e}); "
            "[Q, N] = 0 must hold")
    return (prod + prod.conj().T) / 2.0


def _evaluator(occupation: OccupationOperator, charge: ChargeProjection,
               evolution: np.ndarray, variant: str) -> Callable[[float], np.ndarray]:
    """Per-variant kernel assembler with the lambda-independent work hoisted."""
    n = occupation.matrix
    q = charge.matrix
    u = evolution
    dim = n.shape[0]
    eye = np.eye(dim, dtype=complex)
    n_prime = eye - n

    if variant == "naive":
        def matrix(lam: float) -> np.ndarray:
            e_qu = linalg.conjugate_by(u, linalg.phase_on_projection(q, lam))
            e_q = linalg.phase_on_projection(q, -lam)
            return n_prime + e_qu @ n @ e_q
        return matrix

    if variant == "regularized":
        w_nq, v_nq = linalg.hermitian_eig(_hermitian_product(n, q, "N Q"))
        w_pq, v_pq = linalg.hermitian_eig(_hermitian_product(n_prime, q, "N' Q"))

        def matrix(lam: float) -> np.ndarray:
            e_nq = (v_nq * np.exp(1j * lam * w_nq)) @ v_nq.conj().T
            e_pq = (v_pq * np.exp(-1j * lam * w_pq)) @ v_pq.conj().T
            term1 = linalg.conjugate_by(u, e_nq.conj().T) @ n_prime @ e_nq
            term2 = linalg.conjugate_by(u, e_pq.conj().T) @ n @ e_pq
            return term1 + term2
        return matrix

    if variant == "zero_temperature":
        if occupation.kind != "pure":
            raise ContractError(
                "the reduced kernel requires a pure occupation (N a projection); "
                f"got kind={occupation.kind!r}")
        core = linalg.conjugate_by(u, q) @ (n - linalg.conjugate_by(u, n))

        def matrix(lam: float) -> np.ndarray:
            weight = (np.exp(1j * lam) - 1.0) * n - (np.exp(-1j * lam) - 1.0) * n_prime
            return eye + core @ weight
        return matrix

    raise ContractError(f"unknown kernel variant {variant!r}; expected one of {VARIANTS}")


def _kernel(occupation, charge, evolution, lam, variant) -> CountingKernel:
    matrix = _evaluator(occupation, charge, evolution, variant)(lam)
    tn = linalg.trace_norm(matrix - np.eye(matrix.shape[0]))
    return CountingKernel(lam=float(lam), matrix=matrix, variant=variant,
                          trace_norm_minus_identity=tn)


def levitov_kernel(occupation: OccupationOperator, charge: ChargeProjection,
                   evolution: np.ndarray, lam: float) -> CountingKernel:
    """D(lambda) = N' + e^{i lam Q_U} N e^{-i lam Q}.

    The phase factors use the projection identity
    e^{i lam Q} = 1 + (e^{i lam} - 1) Q and Heisenberg conjugation for Q_U.
    """
    return _kernel(occupation, charge, evolution, lam, "naive")


def regularized_kernel(occupation: OccupationOperator, charge: ChargeProjection,
                       evolution: np.ndarray, lam: float) -> CountingKernel:
    """The regularized kernel whose determinant equals det D(lambda).

    D~(lambda) = e^{-i lam N_U Q_U} N' e^{i lam N Q}
               + e^{i lam N'_U Q_U} N e^{-i lam N' Q}.
    The generators N Q and N' Q are Hermitian because [Q, N] = 0; their
    exponentials are spectral, and the conjugated factors come from
    e^{i lam N_U Q_U} = U^dag e^{i lam N Q} U.
    """
    return _kernel(occupation, charge, evolution, lam, "regularized")


def zero_temperature_kernel(occupation: OccupationOperator, charge: ChargeProjection,
                            evolution: np.ndarray, lam: float) -> CountingKernel:
    """Reduced kernel for a pure occupation:

    D~ = 1 + Q_U (N - N_U) ((e^{i lam} - 1) N - (e^{-i lam} - 1) N').
    """
    return _kernel(occupation, charge, evolution, lam, "zero_temperature")


@dataclass(frozen=True)
class GeneratingFunctionSamples:
    """chi evaluated on the uniform grid lambda_k = 2 pi k / K, k = 0..K-1."""

    values: np.ndarray
    variant: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or v.size < 3:
            raise ContractError("need a 1-d sample vector of size >= 3")
        if abs(v[0] - 1.0) > CHI_AT_ZERO_GATE:
            raise NumericalIntegrityError(
                f"chi(0) = {v[0]:.12g} deviates from 1 beyond {CHI_AT_ZERO_GATE:.0e}")
        sym = linalg.max_abs(v[1:][::-1] - np.conj(v[1:]))
        if sym > CONJUGATE_SYMMETRY_GATE:
            raise NumericalIntegrityError(
                f"conjugate symmetry violated by {sym:.3e}; p_n would not be real")

    @property
    def grid_size(self) -> int:
        return len(self.values)

    @property
    def lambdas(self) -> np.ndarray:
        k = self.grid_size
        return 2.0 * np.pi * np.arange(k) / k


def generating_function(scenario: Scenario, variant: str, grid_size: int,
                        threads: int = 1) -> GeneratingFunctionSamples:
    """Sample chi(lambda_k) = det(kernel(lambda_k)) on the uniform grid.

    ``grid_size`` must be odd and at least 2*dim + 1 so every reachable
    integer charge in [-dim, dim] is alias-free.  Kernel evaluations at
    distinct lambda are independent; ``threads`` > 1 runs them in a pool.
    """
    dim = scenario.dim
    if grid_size < 2 * dim + 1:
        raise ContractError(
            f"grid size {grid_size} aliases charges; need at least {2 * dim + 1}")
    if grid_size % 2 == 0:
        raise ContractError("grid size must be odd for a symmetric charge range")
    matrix = _evaluator(scenario.occupation, scenario.charge,
                        scenario.evolution, variant)
    lams = 2.0 * np.pi * np.arange(grid_size) / grid_size

    def chi(lam: float) -> complex:
        return linalg.determinant(matrix(lam))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = np.fromiter(pool.map(chi, lams), dtype=complex,
                                 count=grid_size)
    else:
        values = np.fromiter((chi(lam) for lam in lams), dtype=complex,
                             count=grid_size)
    return GeneratingFunctionSamples(values=values, variant=variant)


@dataclass(frozen=True)
class ChargeDistribution:
    """Integer-indexed transfer probabilities p_n, n = n_min .. n_min+len-1.

    ``raw`` keeps the unclipped inverse-DFT output; ``probabilities``
    clips roundoff-negative entries to zero for reporting.
    """

    n_min: int
    raw: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.raw, dtype=float)
        if p.min() < -RESIDUE_ERROR_GATE:
            raise DistributionIntegrityError(
                f"probability {p.min():.3e} below -{RESIDUE_ERROR_GATE:.0e}; "
                "kernel or grid is invalid")
        total = float(p.sum())
        if abs(total - 1.0) > NORMALISATION_GATE:
            raise DistributionIntegrityError(
                f"probabilities sum to {total:.12g}, not 1")

    @property
    def probabilities(self) -> np.ndarray:
        return np.clip(self.raw, 0.0, None)

    @property
    def charges(self) -> np.ndarray:
        return self.n_min + np.arange(len(self.raw))

    def moment(self, order: int) -> float:
        return float(np.sum(self.charges.astype(float) ** order * self.raw))


def charge_distribution(samples: GeneratingFunctionSamples) -> ChargeDistribution:
    """Invert the sampled generating function to probabilities by DFT.

    Grid indices above K/2 wrap to negative charges.  Imaginary residues
    are checked and discarded; residues or negativity beyond the error
    gate signal an invalid kernel or aliasing.
    """
    k = samples.grid_size
    coeff = np.fft.fft(np.asarray(samples.values, dtype=complex)) / k
    imag = linalg.max_abs(coeff.imag)
    if imag > RESIDUE_ERROR_GATE:
        raise DistributionIntegrityError(
            f"imaginary residue {imag:.3e} beyond {RESIDUE_ERROR_GATE:.0e}")
    if imag > CONJUGATE_SYMMETRY_GATE:
        raise NumericalIntegrityError(
            f"imaginary residue {imag:.3e} beyond {CONJUGATE_SYMMETRY_GATE:.0e}")
    ordered = np.fft.fftshift(coeff.real)
    return ChargeDistribution(n_min=-((k - 1) // 2), raw=ordered)


@dataclass(frozen=True)
class CumulantVector:
    """Cumulants kappa_1..kappa_order of the transferred charge."""

    kappa: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        if len(k) >= 2 and k[1] < -1e-9:
            raise NumericalIntegrityError(
                f"variance kappa_2 = {k[1]:.3e} is negative beyond gate")

    @property
    def order(self) -> int:
        return len(self.kappa)

    def __getitem__(self, i: int) -> float:
        """1-based access: cv[1] is the mean."""
        if not 1 <= i <= self.order:
            raise IndexError(f"cumulant order {i} outside 1..{self.order}")
        return float(self.kappa[i - 1])


def cumulants(dist: ChargeDistribution, order: int) -> CumulantVector:
    """Cumulants from exact moments of p_n via the standard recursion."""
    if not 1 <= order <= 6:
        raise ContractError("cumulant order must lie in 1..6")
    moments = [dist.moment(j) for j in range(order + 1)]
    kappa = np.zeros(order)
    for n in range(1, order + 1):
        kappa[n - 1] = moments[n] - sum(
            comb(n - 1, j - 1) * kappa[j - 1] * moments[n - j]
            for j in range(1, n))
    return CumulantVector(kappa=kappa)


def mean_transport_direct(occupation: OccupationOperator, charge: ChargeProjection,
                          evolution: np.ndarray) -> float:
    """Renormalised mean transferred charge tr(Q_U (N - N_U)).

    Vanishes whenever the evolution preserves the occupation, in
    particular for the free (decoupled) evolution.
    """
    q_u = linalg.conjugate_by(evolution, charge.matrix)
    n_u = linalg.conjugate_by(evolution, occupation.matrix)
    val = complex(np.trace(q_u @ (occupation.matrix - n_u)))
    if abs(val.imag) > MEAN_IMAG_GATE:
        raise NumericalIntegrityError(
            f"mean transport has imaginary residue {val.imag:.3e}")
    return val.real


def naive_mean(occupation: OccupationOperator, charge: ChargeProjection,
               evolution: np.ndarray) -> float:
    """Unrenormalised mean tr((Q_U - Q) N); equals the direct mean at finite
    dimension but drifts with the depth cutoff in scaling scans."""
    q_u = linalg.conjugate_by(evolution, charge.matrix)
    val = complex(np.trace((q_u - charge.matrix) @ occupation.matrix))
    return val.real


def particle_hole_check(scenario: Scenario, grid_size: int,
                        variant: str = "regularized") -> float:
    """Max grid deviation of chi_N(lambda) from chi_{N'}(-lambda)."""
    matrix_n = _evaluator(scenario.occupation, scenario.charge,
                          scenario.evolution, variant)
    holes = scenario.with_holes()
    matrix_h = _evaluator(holes.occupation, holes.charge,
                          holes.evolution, variant)
    lams = 2.0 * np.pi * np.arange(grid_size) / grid_size
    dev = 0.0
    for lam in lams:
        lhs = linalg.determinant(matrix_n(lam))
        rhs = linalg.determinant(matrix_h(-lam))
        dev = max(dev, abs(lhs - rhs))
    return dev
