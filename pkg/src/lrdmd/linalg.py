"""Tolerance-aware dense linear algebra kernels.

Every estimator in the package goes through :func:`economy_svd` so that a
single numerical-rank convention is used everywhere: a singular value counts
as nonzero when it exceeds ``eps * max(rows, cols) * sigma_max``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NumericalFailure

EPS = np.finfo(np.float64).eps
TINY = np.finfo(np.float64).tiny

#: Largest square matrix accepted by :func:`dense_evd`.
DENSE_EVD_CAP = 4096


def as_matrix(M, name="matrix"):
    """Return `M` as a finite 2-d float64 array or raise :class:`InvalidInput`."""
    A = np.asarray(M, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidInput(f"{name} must be 2-d, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInput(f"{name} has non-finite entries")
    return A


def default_tol(sigma, shape):
    """Numerical-rank threshold ``eps * max(shape) * sigma[0]``.

    Floored at the smallest normal double: subnormal singular values have
    reciprocals that overflow, so they count as zero.
    """
    if len(sigma) == 0:
        return 0.0
    return max(float(EPS * max(shape) * sigma[0]), float(TINY))


@dataclass(frozen=True)
class EconomySvd:
    """Economy-size SVD ``M = U diag(sigma) V^T``.

    Attributes
    ----------
    U : ndarray, shape (p, q)
    sigma : ndarray, shape (q,)
        Nonincreasing, nonnegative.
    V : ndarray, shape (s, q)
        Right singular vectors as columns (``s`` is the column count of M).
    numerical_rank : int
        Number of singular values strictly above `tol_used`.
    tol_used : float
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    numerical_rank: int
    tol_used: float

    @property
    def shape(self):
        return (self.U.shape[0], self.V.shape[0])

    def reconstruct(self):
        return (self.U * self.sigma) @ self.V.T

    def sigma_pinv(self):
        """Reciprocal singular values, zero at or below the tolerance."""
        out = np.zeros_like(self.sigma)
        keep = self.sigma > self.tol_used
        out[keep] = 1.0 / self.sigma[keep]
        return out

    def truncate(self, k):
        """Leading `k` singular triplets as ``(U_k, sigma_k, V_k)``."""
        return self.U[:, :k], self.sigma[:k], self.V[:, :k]


def economy_svd(M, tol=None):
    """Compute the economy SVD of `M` with a deterministic sign convention.

    Wide matrices are handled by factorizing the transpose and swapping the
    factors, so ``q = min(rows, cols)`` in all cases. Each column of ``U`` is
    flipped so that its largest-magnitude entry is nonnegative.

    Parameters
    ----------
    M : array_like, shape (p, s)
    tol : float, optional
        Rank threshold. Defaults to ``eps * max(p, s) * sigma[0]``.

    Returns
    -------
    EconomySvd
    """
    A = as_matrix(M)
    if tol is not None and (not np.isfinite(tol) or tol < 0):
        raise InvalidInput(f"tol must be a nonnegative real, got {tol!r}")
    p, s = A.shape
    try:
        if p >= s:
            U, sigma, Vt = np.linalg.svd(A, full_matrices=False)
            V = Vt.T
        else:
            V, sigma, Ut = np.linalg.svd(A.T, full_matrices=False)
            U = Ut.T
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"SVD did not converge on {p}x{s} input: {exc}") from exc

    if U.shape[1]:
        pivots = np.argmax(np.abs(U), axis=0)
        signs = np.sign(U[pivots, np.arange(U.shape[1])])
        signs[signs == 0] = 1.0
        U = U * signs
        V = V * signs

    tol_used = default_tol(sigma, A.shape) if tol is None else float(tol)
    rank = int(np.count_nonzero(sigma > tol_used))
    return EconomySvd(U=U, sigma=sigma, V=V, numerical_rank=rank, tol_used=tol_used)


def pseudo_inverse(svd):
    """Moore-Penrose pseudo-inverse ``V diag(sigma^+) U^T`` from an SVD."""
    return (svd.V * svd.sigma_pinv()) @ svd.U.T


def row_space_projector(svd):
    """Orthogonal projector onto the row space of the factorized matrix."""
    Vr = svd.V[:, : svd.numerical_rank]
    return Vr @ Vr.T


def column_space_projector(svd):
    """Orthogonal projector onto the column space of the factorized matrix."""
    Ur = svd.U[:, : svd.numerical_rank]
    return Ur @ Ur.T


@dataclass(frozen=True)
class ComplexSpectrum:
    """Eigenvalues and unit-norm right eigenvectors of a small square matrix."""

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    cond_estimate: float


def spectral_order(eigenvalues, rtol=1e-12):
    """Permutation sorting by nonincreasing modulus, then argument in [0, 2pi).

    Moduli within ``rtol * max|lambda|`` of each other are treated as ties so
    that conjugate pairs come out positive-imaginary first regardless of
    round-off in their moduli.
    """
    lam = np.asarray(eigenvalues, dtype=complex)
    if lam.size == 0:
        return np.zeros(0, dtype=int)
    mod = np.abs(lam)
    scale = mod.max()
    if scale > 0:
        mod = np.round(mod / (scale * rtol)) * rtol
    arg = np.mod(np.angle(lam), 2 * np.pi)
    # 2pi - tiny wraps to ~2pi for negative-zero imaginary parts; fold back
    arg[np.isclose(arg, 2 * np.pi)] = 0.0
    return np.lexsort((arg, -mod))


def dense_evd(M, cap=DENSE_EVD_CAP):
    """Eigen-decomposition of a small, possibly nonsymmetric, square matrix.

    Eigenpairs are returned dominant first (see :func:`spectral_order`) with
    unit 2-norm eigenvectors.

    Raises
    ------
    InvalidInput
        Non-square, non-finite or larger than `cap`.
    NumericalFailure
        If LAPACK fails to converge.
    """
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise InvalidInput(f"dense_evd needs a square matrix, got {A.shape}")
    if A.shape[0] > cap:
        raise InvalidInput(f"dense_evd size {A.shape[0]} exceeds cap {cap}")
    if A.shape[0] == 0:
        return ComplexSpectrum(np.zeros(0, complex), np.zeros((0, 0), complex), 1.0)
    try:
        lam, vecs = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigensolver failed on {A.shape[0]}x{A.shape[0]} matrix: {exc}") from exc
    order = spectral_order(lam)
    lam = lam.astype(complex)[order]
    vecs = vecs.astype(complex)[:, order]
    with np.errstate(divide="ignore"):
        cond = float(np.linalg.cond(vecs))
    if not np.isfinite(cond):
        cond = np.inf
    return ComplexSpectrum(eigenvalues=lam, right_vectors=vecs, cond_estimate=cond)


def factored_singular_values(P, Q):
    """Singular values of ``P @ Q.T`` without forming the product."""
    P = np.asarray(P)
    Q = np.asarray(Q)
    if P.shape[1] == 0:
        return np.zeros(0)
    _, Rp = np.linalg.qr(P)
    _, Rq = np.linalg.qr(Q)
    return np.linalg.svd(Rp @ Rq.T, compute_uv=False)


def factored_rank(P, Q, m=None):
    """Numerical rank of ``P @ Q.T`` with the package-wide tolerance.

    `m` is the snapshot count of the data the factors were fitted on; it
    enters the tolerance as ``eps * max(n, m) * sigma_1``.
    """
    s = factored_singular_values(P, Q)
    if s.size == 0 or s[0] == 0:
        return 0
    n = np.asarray(P).shape[0]
    tol = EPS * max(n, m or 0, s.size) * s[0]
    return int(np.count_nonzero(s > tol))
