"""Dense linear algebra for small self-adjoint matrices.

Spectral decompositions, fractional powers and operator norms of d x d
complex Hermitian matrices (d <= 8).  Positive-semidefiniteness is handled
with a relative clamp band so that matrices produced by grid sampling,
which are PSD only up to round-off, are accepted deterministically.

Batched variants operate on arrays of shape (M, d, d) and are the
workhorses for weight fields sampled on grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitian, NotPSD, SingularMatrix

#: relative conjugate-symmetry tolerance
TOL_HERM = 1e-12
#: eigenvalues in [-TOL_PSD_REL * max|lambda|, 0] are clamped to zero
TOL_PSD_REL = 1e-10
#: relative positive-definiteness threshold for negative powers
TOL_PD_REL = 1e-14
#: largest supported matrix dimension
MAX_DIM = 8


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] < 1 or m.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {m.shape[0]} outside supported range 1..{MAX_DIM}")
    return m


def check_hermitian(a, tol: float = TOL_HERM) -> np.ndarray:
    """Validate conjugate symmetry and return the (d, d) complex array.

    Raises NotHermitian when ||A - A^H|| exceeds tol relative to ||A||
    (with an absolute floor so the zero matrix passes).
    """
    m = _as_matrix(a)
    scale = max(float(np.max(np.abs(m))), 1.0)
    if float(np.max(np.abs(m - m.conj().T))) > tol * scale:
        raise NotHermitian("matrix is not conjugate-symmetric within tolerance")
    return m


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues (ascending) and a unitary eigenvector matrix.

    Eigenvector phases follow a deterministic orientation: the first
    component of each column whose modulus is non-negligible is made real
    and positive.  Within degenerate eigenspaces only this phase rule is
    pinned; the basis itself is whatever the backend returns.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def reconstruct(self) -> np.ndarray:
        u = self.vectors
        return (u * self.eigenvalues) @ u.conj().T


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate each eigenvector column so its first nonzero entry is real positive.

    Works on (..., d, d) stacks; column j of each matrix is one eigenvector.
    """
    mags = np.abs(vectors)
    # threshold relative to the largest entry of each column
    thresh = 1e-8 * np.max(mags, axis=-2, keepdims=True)
    significant = mags > thresh
    # index of first significant component per column
    first = np.argmax(significant, axis=-2)
    lead = np.take_along_axis(vectors, first[..., None, :], axis=-2)[..., 0, :]
    lead_mag = np.abs(lead)
    phase = np.where(lead_mag > 0, lead / np.where(lead_mag > 0, lead_mag, 1.0), 1.0)
    return vectors * phase.conj()[..., None, :]


def spectral_decompose(a) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix with deterministic phases."""
    m = check_hermitian(a)
    lam, u = np.linalg.eigh(m)
    u = _fix_phases(u)
    return SpectralDecomposition(eigenvalues=lam, vectors=u)


def _clamp_psd(lam: np.ndarray) -> np.ndarray:
    """Clamp the round-off band [-tol, 0] to zero; reject anything below it."""
    scale = np.max(np.abs(lam), axis=-1, keepdims=True)
    tol = TOL_PSD_REL * scale
    if np.any(lam < -tol):
        worst = float(np.min(lam))
        raise NotPSD(f"eigenvalue {worst:.3e} below the PSD clamp band")
    return np.maximum(lam, 0.0)


def mat_power(a, s: float) -> np.ndarray:
    """Fractional power A^s of a PSD Hermitian matrix via its eigensystem.

    For s < 0 the matrix must be positive-definite; otherwise
    SingularMatrix is raised.  The result is Hermitian PSD.
    """
    dec = spectral_decompose(a)
    lam = _clamp_psd(dec.eigenvalues)
    if s < 0:
        tol_pd = TOL_PD_REL * float(np.max(lam))
        if float(np.min(lam)) <= tol_pd:
            raise SingularMatrix("negative power of a singular (or near-singular) matrix")
    lam_s = np.power(lam, s)
    u = dec.vectors
    out = (u * lam_s) @ u.conj().T
    return 0.5 * (out + out.conj().T)


def op_norm(a) -> float:
    """Operator norm of a PSD Hermitian matrix: its largest eigenvalue."""
    dec = spectral_decompose(a)
    lam = _clamp_psd(dec.eigenvalues)
    return float(lam[-1])


def spectral_norm(a) -> float:
    """Spectral (2-)norm of a general matrix, i.e. its largest singular value."""
    m = np.asarray(a, dtype=np.complex128)
    return float(np.linalg.norm(m, 2))


# ---------------------------------------------------------------------------
# batched helpers for (M, d, d) stacks


def batched_check_hermitian(mats: np.ndarray, tol: float = TOL_HERM) -> np.ndarray:
    m = np.asarray(mats, dtype=np.complex128)
    if m.ndim != 3 or m.shape[1] != m.shape[2]:
        raise ValueError(f"expected shape (M, d, d), got {m.shape}")
    scale = np.maximum(np.max(np.abs(m), axis=(1, 2)), 1.0)
    dev = np.max(np.abs(m - np.conj(np.swapaxes(m, 1, 2))), axis=(1, 2))
    if np.any(dev > tol * scale):
        raise NotHermitian("matrix stack is not conjugate-symmetric within tolerance")
    return m


def batched_eigh(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigensystems for a stack of Hermitian matrices, phases fixed.

    Returns (lam, u) with lam of shape (M, d) ascending and u of shape
    (M, d, d) unitary.
    """
    m = batched_check_hermitian(mats)
    lam, u = np.linalg.eigh(m)
    return lam, _fix_phases(u)


def batched_power_from_eig(lam: np.ndarray, u: np.ndarray, s: float) -> np.ndarray:
    """A^s for every matrix of a stack given precomputed eigensystems."""
    lam_c = _clamp_psd(lam)
    if s < 0:
        tol_pd = TOL_PD_REL * np.max(lam_c, axis=1)
        if np.any(np.min(lam_c, axis=1) <= tol_pd):
            raise SingularMatrix("negative power of a singular matrix in the stack")
    lam_s = np.power(lam_c, s)
    out = np.einsum("mik,mk,mjk->mij", u, lam_s, u.conj())
    return 0.5 * (out + np.conj(np.swapaxes(out, 1, 2)))


def batched_spectral_norm(mats: np.ndarray) -> np.ndarray:
    """Largest singular value of every matrix in a (..., d, d) stack."""
    return np.linalg.svd(mats, compute_uv=False)[..., 0]
