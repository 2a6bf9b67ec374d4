"""Complex linear algebra kernel: adjoints, tensor products, unitary eigensystems.

Vectors and matrices are numpy arrays of complex128. The eigensolver for
unitary matrices is a two-stage Jacobi scheme: diagonalize the Hermitian
part, then split degenerate clusters with the anti-Hermitian part. This
keeps eigenvectors of unitaries with repeated eigenvalue real-orthonormal
within each cluster and avoids the phase ambiguity a generic dense solver
would introduce.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Type aliases: complex128 numpy arrays, 1-d for vectors, 2-d for matrices.
CVector = np.ndarray
CMatrix = np.ndarray

# Largest supported register: 12 qubits, so 4096-dimensional operators.
MAX_QUBITS = 12
MAX_DIM = 2 ** MAX_QUBITS

# Eigenvalues of the Hermitian part closer than this are treated as one
# degenerate cluster and re-split by the anti-Hermitian part.
DEGENERACY_TOL = 1e-8


class ConvergenceError(RuntimeError):
    """Jacobi sweeps exhausted before the off-diagonal mass vanished."""

    def __init__(self, message: str, iterations: int):
        super().__init__(f"{message} (after {iterations} iterations)")
        self.iterations = iterations


@dataclass(frozen=True)
class EigenPair:
    """One eigenpair of a unitary, stored as value = exp(-1j * phase).

    phase lies in (-pi, pi]; vector is a unit-norm complex column.
    """

    phase: float
    value: complex
    vector: CVector


def as_cvector(data) -> CVector:
    v = np.asarray(data, dtype=np.complex128)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    return v


def as_cmatrix(data) -> CMatrix:
    m = np.asarray(data, dtype=np.complex128)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def matmul(a: CMatrix, b: CMatrix) -> CMatrix:
    return as_cmatrix(a) @ as_cmatrix(b)


def adjoint(a: CMatrix) -> CMatrix:
    return as_cmatrix(a).conj().T


def tensor(a: CMatrix, b: CMatrix) -> CMatrix:
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def inner(u: CVector, v: CVector) -> complex:
    """Inner product, conjugate-linear in the first argument."""
    return complex(np.vdot(as_cvector(u), as_cvector(v)))


def is_unitary(a: CMatrix, tol: float = 1e-10) -> bool:
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    dev = np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])))
    return bool(dev <= tol)


def unitarity_deviation(a: CMatrix) -> float:
    a = as_cmatrix(a)
    if a.shape[0] != a.shape[1]:
        return math.inf
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0]))))


def _jacobi_hermitian(h: CMatrix, tol: float = 1e-13, max_sweeps: int = 60):
    """Cyclic Jacobi for a complex Hermitian matrix.

    Returns (eigenvalues, column eigenvectors). Each rotation
    R = [[c, -s*phase], [s*conj(phase), c]] with
    theta = 0.5*atan2(2*|a_pq|, a_pp - a_qq) zeroes the (p, q) pivot, and
    every zeroing rotation moves exactly 2|a_pq|^2 of squared off-diagonal
    mass onto the diagonal, so sweeps decrease monotonically.
    """
    a = np.array(h, dtype=np.complex128)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    if n == 1:
        return a.real.diagonal().copy(), v, 0
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off += abs(a[p, q]) ** 2
        if math.sqrt(off) <= tol * max(1.0, float(np.linalg.norm(np.diag(a)))):
            return np.diag(a).real.copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                app = a[p, p].real
                aqq = a[q, q].real
                rho = abs(apq)
                phase = apq / rho
                theta = 0.5 * math.atan2(2.0 * rho, app - aqq)
                c = math.cos(theta)
                s = math.sin(theta)
                r = np.eye(n, dtype=np.complex128)
                r[p, p] = c
                r[p, q] = -s * phase
                r[q, p] = s * np.conj(phase)
                r[q, q] = c
                a = r.conj().T @ a @ r
                v = v @ r
    raise ConvergenceError("Jacobi eigensolver failed to converge", max_sweeps)


def _fix_vector_phase(vec: CVector) -> CVector:
    """Rotate the global phase so the last component above 1e-10 is real positive."""
    for i in range(len(vec) - 1, -1, -1):
        if abs(vec[i]) > 1e-10:
            return vec / (vec[i] / abs(vec[i]))
    return vec.copy()


def eig_unitary(s: CMatrix, tol: float = 1e-9) -> list[EigenPair]:
    """Full eigensystem of a unitary matrix, sorted by ascending phase.

    Writes each eigenvalue as exp(-1j * phase) with phase in (-pi, pi].
    The Hermitian part (S + S^dag)/2 fixes the eigenspaces up to
    degeneracy; the anti-Hermitian part (S - S^dag)/2i splits clusters
    whose Hermitian eigenvalues agree within DEGENERACY_TOL. Eigenvector
    global phases are normalized deterministically.
    """
    s = as_cmatrix(s)
    n = s.shape[0]
    if s.shape[0] != s.shape[1]:
        raise ValueError(f"matrix must be square, got shape {s.shape}")
    if n > MAX_DIM:
        raise ValueError(f"dimension {n} exceeds the 2**{MAX_QUBITS} operator limit")
    dev = unitarity_deviation(s)
    if dev > max(tol, 1e-10):
        raise ValueError(f"matrix is not unitary (deviation {dev:.3e})")

    a = (s + s.conj().T) / 2.0
    b = (s - s.conj().T) / 2.0j
    alphas, v, sweeps = _jacobi_hermitian(a)
    order = np.argsort(alphas, kind="stable")
    alphas = alphas[order]
    v = v[:, order]

    # Split clusters of the Hermitian spectrum with the anti-Hermitian part.
    i = 0
    while i < n:
        j = i + 1
        while j < n and alphas[j] - alphas[j - 1] <= DEGENERACY_TOL:
            j += 1
        if j - i > 1:
            vc = v[:, i:j]
            bc = vc.conj().T @ b @ vc
            bc = (bc + bc.conj().T) / 2.0
            _, w, extra = _jacobi_hermitian(bc)
            sweeps += extra
            v[:, i:j] = vc @ w
        i = j

    lam = np.array([np.vdot(v[:, k], s @ v[:, k]) for k in range(n)])
    phases = np.array([-math.atan2(z.imag, z.real) for z in lam])
    phases = np.where(phases <= -math.pi + 1e-9, phases + 2.0 * math.pi, phases)
    order = np.argsort(phases, kind="stable")

    pairs = []
    for idx in order:
        vec = _fix_vector_phase(v[:, idx])
        ph = float(phases[idx])
        pairs.append(EigenPair(phase=ph, value=complex(np.exp(-1j * ph)), vector=vec))

    worst = max(
        float(np.linalg.norm(s @ p.vector - p.value * p.vector)) for p in pairs
    )
    if worst > tol:
        raise ConvergenceError(
            f"eigensystem residual {worst:.3e} exceeds tolerance {tol:.1e}", sweeps
        )
    return pairs
