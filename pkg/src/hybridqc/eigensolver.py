"""Reference ground-state solvers: dense diagonalisation and matrix-free Lanczos."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .statevector import PauliOperator, PauliString, StateVector, check_memory

DENSE_CAP = 12
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500


class ConvergenceError(RuntimeError):
    """Lanczos did not reach the tolerance; carries the best estimate."""

    def __init__(self, message: str, result: "EigenResult"):
        super().__init__(message)
        self.result = result


@dataclass
class EigenResult:
    e0: float
    vector: StateVector | None
    iterations: int
    residual: float


_SPARSE_PAULI = {
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=complex)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=complex)),
    "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=complex)),
}


def sparse_matrix(terms: Sequence[PauliString], n: int) -> sp.csr_matrix:
    """Explicit sparse matrix from Kronecker products (independent of PauliOperator)."""
    eye = sp.identity(2, dtype=complex, format="csr")
    total = sp.csr_matrix((1 << n, 1 << n), dtype=complex)
    for t in terms:
        letters = dict(t.factors)
        mat = sp.identity(1, dtype=complex, format="csr")
        for q in reversed(range(n)):
            mat = sp.kron(mat, _SPARSE_PAULI[letters[q]] if q in letters else eye, format="csr")
        total = total + t.prefactor * mat
    return total


def ground_dense(terms: Sequence[PauliString], n: int, cap: int = DENSE_CAP) -> EigenResult:
    """Lowest eigenpair of the explicitly built Hamiltonian."""
    if n > cap:
        raise ValueError(f"dense diagonalisation limited to {cap} qubits, got {n}")
    mat = sparse_matrix(terms, n).toarray()
    if not np.allclose(mat, mat.conj().T, atol=1e-12):
        raise ValueError("Hamiltonian is not Hermitian")
    w, v = scipy.linalg.eigh(mat, subset_by_index=[0, 0])
    vec = v[:, 0]
    residual = float(np.linalg.norm(mat @ vec - w[0] * vec))
    return EigenResult(float(w[0]), StateVector(n, vec), 1, residual)


def _random_start(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def ground_lanczos(
    operator: PauliOperator | Callable[[np.ndarray], np.ndarray],
    n: int,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    seed: int | None = 0,
    max_basis: int = 64,
) -> EigenResult:
    """Ground state by thick-restarted Lanczos with full reorthogonalisation.

    The Krylov basis is capped at ``max_basis`` vectors; when full, the
    lowest Ritz vectors and the current residual direction are kept and the
    iteration continues from there.  ``iterations`` counts operator
    applications, including one explicit residual check per cycle.
    Converged when ||Hv - e0 v|| < tol.
    """
    check_memory(n)
    if max_iter < 2:
        raise ValueError("max_iter must be >= 2")
    matvec = operator.matvec if isinstance(operator, PauliOperator) else operator
    dim = 1 << n
    rng = np.random.default_rng(seed)
    m = max(2, min(max_basis, dim))
    keep_max = max(1, min(m - 2, m // 4 + 1))
    basis = np.empty((m, dim), dtype=complex)
    basis[0] = _random_start(dim, rng)
    # projected matrix basis^H H basis; tridiagonal apart from the restart arrow
    T = np.zeros((m, m), dtype=complex)
    k = 0
    iterations = 0
    best = None

    while True:
        while True:
            w = matvec(basis[k])
            iterations += 1
            h = np.zeros(k + 1, dtype=complex)
            # two passes of classical Gram-Schmidt against the whole basis
            for _ in range(2):
                c = (basis[: k + 1] @ w.conj()).conj()
                w -= c @ basis[: k + 1]
                h += c
            T[: k + 1, k] = h
            T[k, : k + 1] = h.conj()
            T[k, k] = h[k].real
            beta = float(np.linalg.norm(w))
            theta, s = np.linalg.eigh(T[: k + 1, : k + 1])
            est = beta * abs(s[k, 0])
            if est < tol or beta < 1e-14 or k + 1 == m or iterations + 1 >= max_iter:
                break
            basis[k + 1] = w / beta
            T[k + 1, k] = T[k, k + 1] = beta
            k += 1

        x = s[:, 0] @ basis[: k + 1]
        x /= np.linalg.norm(x)
        hx = matvec(x)
        iterations += 1
        e0 = float(np.vdot(x, hx).real)
        residual = float(np.linalg.norm(hx - e0 * x))
        if best is None or residual < best.residual:
            best = EigenResult(e0, StateVector(n, x), iterations, residual)
        if residual < tol:
            return best
        if iterations >= max_iter:
            raise ConvergenceError(
                f"Lanczos not converged after {iterations} iterations "
                f"(residual {best.residual:.3e} > tol {tol:.1e})",
                best,
            )
        keep = min(k + 1, keep_max)
        ritz = s[:, :keep].T @ basis[: k + 1]
        basis[:keep] = ritz
        T[:] = 0
        T[np.arange(keep), np.arange(keep)] = theta[:keep]
        if beta >= 1e-14:
            basis[keep] = w / beta
            coupling = beta * s[k, :keep]
            T[keep, :keep] = coupling
            T[:keep, keep] = coupling.conj()
        else:
            # invariant subspace without the ground state: fresh random direction
            r = _random_start(dim, rng)
            for _ in range(2):
                r -= (basis[:keep] @ r.conj()).conj() @ basis[:keep]
            basis[keep] = r / np.linalg.norm(r)
        k = keep
