"""Shared random-matrix factories and small independent oracles."""

import numpy as np


def random_complex(rng, rows, cols=None):
    cols = rows if cols is None else cols
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(rng, n):
    a = random_complex(rng, n)
    return (a + a.conj().T) / 2.0


def random_unitary(rng, n):
    q, r = np.linalg.qr(random_complex(rng, n))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projection(rng, n, rank):
    u = random_unitary(rng, n)
    return u[:, :rank] @ u[:, :rank].conj().T


def expm_taylor(a, t):
    """Scaling-and-squaring Taylor series for exp(-i*a*t)."""
    x = -1j * t * np.asarray(a, dtype=complex)
    squarings = max(0, int(np.ceil(np.log2(max(np.abs(x).max(), 1e-30)))) + 4)
    x = x / (2 ** squarings)
    out = np.eye(a.shape[0], dtype=complex)
    term = np.eye(a.shape[0], dtype=complex)
    for k in range(1, 40):
        term = term @ x / k
        out = out + term
        if np.abs(term).max() < 1e-20:
            break
    for _ in range(squarings):
        out = out @ out
    return out


def cofactor_det(a):
    """Recursive cofactor expansion along the first row."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 1:
        return complex(a[0, 0])
    total = 0.0 + 0.0j
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1) ** j * a[0, j] * cofactor_det(minor)
    return total
