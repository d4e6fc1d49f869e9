"""Spectral factorization of low-rank operators and reduced-model parameters.

For ``A = P Q^T`` the nonzero eigenpairs of A follow from two k x k problems:
``(Q^T P) w_r = lambda w_r`` and ``(P^T Q) w_l = lambda w_l`` give right and
left eigenvectors ``zeta = P w_r`` and ``xi = Q w_l``, which are then rescaled
so that ``xi^T zeta = 1``. With the optimal factors this is exactly the
low-rank DMD; any other estimator's factors go through the same path.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapExceeded,
    DefectiveOperator,
    NotDiagonalizable,
    SpectralPairingError,
)
from .linalg import EPS, dense_evd, factored_singular_values, spectral_order

log = logging.getLogger(__name__)

#: Largest n for which n x n operators may be materialized.
DENSE_CAP = 512

#: Eigenvector-matrix condition number above which a model is treated as
#: non-diagonalizable.
COND_LIMIT = 1e8

PAIRING_RTOL = 1e-6
CONSISTENCY_RTOL = 1e-10


@dataclass
class SpectralModel:
    """Economy EVD ``A = sum_i zeta_i lambda_i xi_i^T``.

    ``right[:, i]`` and ``left[:, i]`` are bi-orthogonal: ``left.T @ right = I``.
    """

    eigenvalues: np.ndarray
    right: np.ndarray
    left: np.ndarray
    diagonalizable: bool
    cond_estimate: float

    @property
    def r(self):
        return len(self.eigenvalues)

    @property
    def n(self):
        return self.right.shape[0]

    def apply(self, v):
        return self.right @ (self.eigenvalues * (self.left.T @ v))

    def to_dict(self):
        def cplx(a):
            return [{"re": float(z.real), "im": float(z.imag)} for z in np.ravel(a)]

        return {
            "rank": self.r,
            "n": int(self.right.shape[0]),
            "diagonalizable": bool(self.diagonalizable),
            "cond_estimate": float(self.cond_estimate) if np.isfinite(self.cond_estimate) else None,
            "eigenvalues": cplx(self.eigenvalues),
            "right_vectors": [cplx(self.right[:, i]) for i in range(self.r)],
            "left_vectors": [cplx(self.left[:, i]) for i in range(self.r)],
        }

    @classmethod
    def from_dict(cls, d):
        def arr(items):
            return np.array([complex(z["re"], z["im"]) for z in items], dtype=complex)

        n = int(d["n"])
        r = int(d["rank"])
        right = np.column_stack([arr(v) for v in d["right_vectors"]]) if r else np.zeros((n, 0), complex)
        left = np.column_stack([arr(v) for v in d["left_vectors"]]) if r else np.zeros((n, 0), complex)
        cond = d.get("cond_estimate")
        return cls(
            eigenvalues=arr(d["eigenvalues"]),
            right=right,
            left=left,
            diagonalizable=bool(d["diagonalizable"]),
            cond_estimate=np.inf if cond is None else float(cond),
        )


@dataclass
class RomParams:
    """Reduced recursion ``z_2 = L^T theta``, ``z_t = S z_{t-1}``, ``x_t = R z_t``."""

    R: np.ndarray
    L: np.ndarray
    S: np.ndarray
    form: str

    @property
    def n(self):
        return self.R.shape[0]

    @property
    def r(self):
        return self.S.shape[0]


def rom_params_from_factors(factors):
    """``R = P``, ``L = Q``, ``S = Q^T P``."""
    P, Q = factors.P, factors.Q
    return RomParams(R=P, L=Q, S=Q.T @ P, form="pq")


def rom_params_from_spectral(model):
    """``R = (zeta_i)``, ``L = (lambda_i xi_i)``, ``S = diag(lambda_i)``.

    One factor of ``lambda`` is folded into `L` so that ``R S^(t-2) L^T``
    equals ``A^(t-1)``, the same powers the pq form produces.
    """
    if not model.diagonalizable:
        raise NotDiagonalizable(
            f"spectral reduced model needs a diagonalizable operator (cond {model.cond_estimate:.3g})"
        )
    return RomParams(R=model.right, L=model.left * model.eigenvalues, S=np.diag(model.eigenvalues), form="spectral")


def dense_operator(factors, cap=DENSE_CAP):
    """Materialize ``P Q^T``; refused above `cap` rows."""
    if factors.n > cap:
        raise CapExceeded(f"refusing to form a {factors.n}x{factors.n} operator (cap {cap})")
    return factors.P @ factors.Q.T


def _match(lam_r, lam_l, tol):
    """Greedy nearest-eigenvalue assignment of left to right eigenpairs."""
    order = []
    free = list(range(len(lam_l)))
    for i, lam in enumerate(lam_r):
        d = [abs(lam_l[j] - lam) for j in free]
        j = int(np.argmin(d))
        if d[j] > tol:
            raise SpectralPairingError(
                f"right eigenvalue {lam:.6g} has no left partner within {tol:.3g} (closest {d[j]:.3g})"
            )
        order.append(free.pop(j))
    return np.array(order, dtype=int)


def _clusters(lam, tol):
    groups = []
    for i in range(len(lam)):
        for g in groups:
            if abs(lam[g[0]] - lam[i]) <= tol:
                g.append(i)
                break
        else:
            groups.append([i])
    return groups


def evd_lowrank(factors, tol=None):
    """Economy EVD of ``P Q^T`` via the two k x k eigenproblems.

    Parameters
    ----------
    factors : LowRankFactors
    tol : float, optional
        Eigenvalues with modulus at or below `tol` are dropped. Defaults to
        ``eps * max(n, k) * sigma_1(P Q^T)``; at most ``factors.r`` pairs are
        kept in any case.

    Returns
    -------
    SpectralModel
        Eigenpairs sorted by nonincreasing modulus.

    Raises
    ------
    SpectralPairingError
        Left and right spectra disagree beyond the pairing tolerance.
    DefectiveOperator
        A left/right pair is numerically orthogonal before rescaling.
    """
    P, Q = factors.P, factors.Q
    n, k = P.shape
    empty = SpectralModel(np.zeros(0, complex), np.zeros((n, 0), complex), np.zeros((n, 0), complex), True, 1.0)
    if k == 0 or factors.r == 0:
        return empty
    sv = factored_singular_values(P, Q)
    if tol is None:
        tol = EPS * max(n, k) * sv[0]

    M = Q.T @ P
    right = dense_evd(M)
    left = dense_evd(P.T @ Q)
    lam = right.eigenvalues
    scale = max(float(np.max(np.abs(lam))), float(sv[0]), 1e-300)
    idx = _match(lam, left.eigenvalues, PAIRING_RTOL * scale)
    lam_l = left.eigenvalues[idx]
    gap = float(np.max(np.abs(lam - lam_l)))
    if gap > CONSISTENCY_RTOL * scale:
        log.warning("left/right spectra differ by %.3g (scale %.3g)", gap, scale)

    keep = np.flatnonzero(np.abs(lam) > tol)[: factors.r]
    if keep.size == 0:
        return empty
    lam = lam[keep]
    Wr = right.right_vectors[:, keep]
    Wl = left.right_vectors[:, idx[keep]]
    zeta = P @ Wr
    xi = Q @ Wl

    for group in _clusters(lam, PAIRING_RTOL * scale):
        g = np.array(group)
        G = xi[:, g].T @ zeta[:, g]
        norms = np.linalg.norm(xi[:, g], axis=0) * np.linalg.norm(zeta[:, g], axis=0)
        if g.size == 1:
            if abs(G[0, 0]) < 1e-12 * norms[0]:
                raise DefectiveOperator(
                    f"left/right eigenvectors for lambda={lam[g[0]]:.6g} are orthogonal"
                )
            xi[:, g] = xi[:, g] / G[0, 0]
        else:
            s = np.linalg.svd(G, compute_uv=False)
            if s[-1] < 1e-12 * np.max(norms):
                raise DefectiveOperator(
                    f"repeated eigenvalue {lam[g[0]]:.6g} has a defective eigenspace"
                )
            xi[:, g] = xi[:, g] @ np.linalg.inv(G).T

    order = spectral_order(lam)
    lam, zeta, xi = lam[order], zeta[:, order], xi[:, order]
    colnorm = np.linalg.norm(zeta, axis=0)
    with np.errstate(divide="ignore"):
        cond = float(np.linalg.cond(zeta / colnorm))
    if not np.isfinite(cond):
        cond = np.inf
    return SpectralModel(lam, zeta, xi, diagonalizable=cond <= COND_LIMIT, cond_estimate=cond)


def reconstruction_check(factors, model, probes=4, seed=0, rtol=1e-8):
    """Compare ``P Q^T v`` and the spectral sum on random probe vectors.

    Returns ``(passed, max_error)`` with the error relative to
    ``max(1, ||P Q^T v||)``.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        v = rng.standard_normal(factors.n)
        ref = factors.apply(v)
        got = model.apply(v)
        err = float(np.max(np.abs(ref - got)) / max(1.0, float(np.max(np.abs(ref)))))
        worst = max(worst, err)
    return bool(worst <= rtol), worst

