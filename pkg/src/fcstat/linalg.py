"""Dense complex linear algebra kernel shared by all other modules.

Everything here is a pure function over immutable inputs: Hermitian
eigendecompositions, spectral exponentials, determinants, singular values
and Schatten norms.  Validation gates raise instead of clamping, so that
invariant drift is visible in tests rather than silently absorbed.
"""

from __future__ import annotations

import numpy as np

from .errors import ContractError, ConvergenceError, NumericalIntegrityError

HERMITICITY_RTOL = 1e-12
UNITARITY_ATOL = 1e-10
PROJECTION_ATOL = 1e-10
EIG_RECONSTRUCTION_RTOL = 1e-10


def max_abs(a: np.ndarray) -> float:
    """Largest entry magnitude; zero for an empty array."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def as_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ContractError(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ContractError(f"{name} has non-finite entries")
    return a


def check_hermitian(a: np.ndarray, name: str = "matrix",
                    rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    """Validate Hermiticity relative to the entry scale and return the array."""
    a = as_square(a, name)
    defect = max_abs(a - a.conj().T)
    if defect > rtol * max(max_abs(a), 1e-300):
        raise ContractError(
            f"{name} is not Hermitian: defect {defect:.3e} exceeds "
            f"{rtol:.0e} * scale")
    return a


def check_unitary(u: np.ndarray, name: str = "matrix",
                  atol: float = UNITARITY_ATOL) -> np.ndarray:
    u = as_square(u, name)
    defect = max_abs(u.conj().T @ u - np.eye(u.shape[0]))
    if defect > atol:
        raise ContractError(
            f"{name} is not unitary: defect {defect:.3e} exceeds {atol:.0e}")
    return u


def check_projection(p: np.ndarray, name: str = "matrix",
                     atol: float = PROJECTION_ATOL) -> np.ndarray:
    """Validate an orthogonal projection: Hermitian, idempotent, 0/1 spectrum."""
    p = check_hermitian(p, name, rtol=1e-10)
    defect = max_abs(p @ p - p)
    if defect > atol:
        raise ContractError(
            f"{name} is not idempotent: defect {defect:.3e} exceeds {atol:.0e}")
    w = np.linalg.eigvalsh(p)
    off = float(np.max(np.minimum(np.abs(w), np.abs(w - 1.0)))) if w.size else 0.0
    if off > atol:
        raise ContractError(
            f"{name} eigenvalues stray from {{0,1}} by {off:.3e}")
    return p


def hermitian_eig(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns ascending eigenvalues and the unitary matrix of eigenvectors
    (as columns).  The reconstruction ``V diag(w) V^dag`` is gated against
    the input.
    """
    a = check_hermitian(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"hermitian eigensolver failed: {exc}") from exc
    n = a.shape[0]
    ortho = max_abs(v.conj().T @ v - np.eye(n))
    if ortho > 1e-10:
        raise NumericalIntegrityError(
            f"eigenvector basis lost orthonormality: defect {ortho:.3e}")
    recon = max_abs((v * w) @ v.conj().T - a)
    if recon > EIG_RECONSTRUCTION_RTOL * (1.0 + max_abs(a)):
        raise NumericalIntegrityError(
            f"spectral reconstruction defect {recon:.3e} exceeds gate")
    return w, v


def unitary_exp(a: np.ndarray, t: float) -> np.ndarray:
    """exp(-i*a*t) for Hermitian ``a`` via its spectral decomposition."""
    w, v = hermitian_eig(a)
    u = (v * np.exp(-1j * w * t)) @ v.conj().T
    return check_unitary(u, "unitary_exp result")


def phase_exp(a: np.ndarray, s: float) -> np.ndarray:
    """exp(+i*s*a) for Hermitian ``a``; convenience wrapper over unitary_exp."""
    return unitary_exp(a, -s)


def phase_on_projection(p: np.ndarray, lam: float) -> np.ndarray:
    """exp(i*lam*P) for a projection P, via 1 + (e^{i lam}-1) P."""
    p = np.asarray(p, dtype=complex)
    return np.eye(p.shape[0], dtype=complex) + (np.exp(1j * lam) - 1.0) * p


def determinant(a: np.ndarray) -> complex:
    """det(a) by LU factorisation with partial pivoting.

    Singular input returns exactly 0; no error is raised.
    """
    a = as_square(a)
    return complex(np.linalg.det(a))


def singular_values(a: np.ndarray) -> np.ndarray:
    """Non-negative singular values in descending order."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ContractError(f"expected a matrix, got ndim {a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ContractError("matrix has non-finite entries")
    try:
        return np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"SVD failed to converge: {exc}") from exc


def schatten_norm(a: np.ndarray, p: float) -> float:
    """Schatten p-norm (sum of p-th powers of singular values)^(1/p)."""
    if p < 1:
        raise ContractError(f"Schatten order must satisfy p >= 1, got {p}")
    s = singular_values(a)
    if s.size == 0:
        return 0.0
    if p == 1:
        return float(np.sum(s))
    return float(np.sum(s ** p) ** (1.0 / p))


def trace_norm(a: np.ndarray) -> float:
    return schatten_norm(a, 1)


def conjugate_by(u: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Heisenberg conjugation ``u^dag a u``."""
    u = np.asarray(u, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if u.shape != a.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ContractError(
            f"conjugate_by needs matching square matrices, got {u.shape} and {a.shape}")
    return u.conj().T @ a @ u


def hermitian_sqrt(a: np.ndarray, floor: float = -1e-10) -> np.ndarray:
    """Spectral square root of a PSD Hermitian matrix.

    Eigenvalues below ``floor`` raise; small negative roundoff is clipped.
    """
    w, v = hermitian_eig(a)
    if w.size and float(w.min()) < floor * (1.0 + max_abs(a)):
        raise ContractError(
            f"matrix is not positive semidefinite: min eigenvalue {w.min():.3e}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T
