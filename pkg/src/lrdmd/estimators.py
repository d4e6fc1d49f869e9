"""Rank-constrained DMD operator estimators.

All estimators return the operator in factored form ``A = P @ Q.T`` together
with a :class:`FitReport`. None of them forms an n x n matrix.

``fit_optimal`` computes the exact minimizer of ``||Y - A X||_F`` subject to
``rank(A) <= k``: project ``Y X^+`` onto the leading ``k`` left singular
vectors of ``Z = Y P_{X^T}``. The other five are the usual sub-optimal
approximations (truncated, projected, sparse, total-least-squares and
nuclear-norm regularized DMD) kept for comparison.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlphaBracketFailure,
    GammaGridExhausted,
    InvalidInput,
    NotConverged,
)
from .linalg import EconomySvd, economy_svd, factored_rank
from .snapshots import SnapshotPair

METHODS = ("optimal", "truncated", "projected", "sparse", "tls", "nuclear")


@dataclass
class LowRankFactors:
    """Operator ``A = P @ Q.T`` with ``P``, ``Q`` of shape (n, c).

    ``r`` is the numerical rank of the product, which may be smaller than the
    column count ``c`` and than `k_requested`.
    """

    P: np.ndarray
    Q: np.ndarray
    r: int
    method: str
    k_requested: int

    @property
    def n(self):
        return self.P.shape[0]

    def apply(self, v):
        return self.P @ (self.Q.T @ v)


@dataclass
class FitReport:
    residual_frobenius: float
    closed_form_error: float | None = None
    singular_values_Z: list | None = None
    iterations: int | None = None
    wall_time: float = 0.0
    hyperparams: dict = field(default_factory=dict)
    converged: bool = True

    def to_dict(self, with_timing=False):
        d = {
            "residual_frobenius": self.residual_frobenius,
            "closed_form_error": self.closed_form_error,
            "singular_values_Z": self.singular_values_Z,
            "iterations": self.iterations,
            "hyperparams": self.hyperparams,
            "converged": self.converged,
        }
        if with_timing:
            d["wall_time"] = self.wall_time
        return d


@dataclass
class OptimalSolverState:
    """Intermediate quantities of the closed-form solver."""

    svd_X: EconomySvd
    Z: np.ndarray
    svd_Z: EconomySvd
    U_Zk: np.ndarray
    W: np.ndarray


def _check_k(pair, k, upper=None):
    upper = min(pair.n, pair.m) if upper is None else upper
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise InvalidInput(f"k must be an integer, got {k!r}")
    if not 1 <= k <= upper:
        raise InvalidInput(f"k must lie in [1, {upper}], got {k}")
    return int(k)


def _make(pair, P, Q, method, k_requested):
    P = np.ascontiguousarray(P, dtype=np.float64)
    Q = np.ascontiguousarray(Q, dtype=np.float64)
    r = factored_rank(P, Q, pair.m)
    return LowRankFactors(P=P, Q=Q, r=r, method=method, k_requested=k_requested)


def residual_frobenius(pair, factors):
    """``||Y - P (Q^T X)||_F`` evaluated right to left."""
    if factors.P.shape != factors.Q.shape or factors.P.shape[0] != pair.n:
        raise InvalidInput(
            f"factor shapes {factors.P.shape}/{factors.Q.shape} do not match n={pair.n}"
        )
    return float(np.linalg.norm(pair.Y - factors.P @ (factors.Q.T @ pair.X)))


def _pinv_apply_right(svd_X, M):
    """``M @ X^+`` for an (a, m) matrix M, computed as ``((M V) S^+) U^T``."""
    return ((M @ svd_X.V) * svd_X.sigma_pinv()) @ svd_X.U.T


# -- optimal -----------------------------------------------------------------


def compute_optimal_state(pair, k):
    """Steps 1-3 of the closed-form solver plus the right factor ``W``.

    ``W = (U_Zk^T Y X^+)^T``. Columns of ``W`` attached to numerically zero
    singular values of ``Z`` vanish in exact arithmetic and are set to zero.
    """
    k = _check_k(pair, k)
    svd_X = economy_svd(pair.X)
    Vr = svd_X.V[:, : svd_X.numerical_rank]
    Z = (pair.Y @ Vr) @ Vr.T
    svd_Z = economy_svd(Z)
    U_Zk = svd_Z.U[:, :k]
    Wt = _pinv_apply_right(svd_X, U_Zk.T @ pair.Y)
    W = Wt.T.copy()
    W[:, svd_Z.numerical_rank :] = 0.0
    return OptimalSolverState(svd_X=svd_X, Z=Z, svd_Z=svd_Z, U_Zk=U_Zk, W=W)


def closed_form_error(state, pair, k):
    """Optimal error ``sqrt(sum_{i>k} sigma_Z,i^2 + ||Y (I - P_{X^T})||_F^2)``."""
    tail = float(np.sum(state.svd_Z.sigma[k:] ** 2))
    off_rowspace = float(np.linalg.norm(pair.Y - state.Z) ** 2)
    return float(np.sqrt(tail + off_rowspace))


def fit_optimal(pair, k):
    """Exact solution of ``min ||Y - A X||_F`` s.t. ``rank(A) <= k``.

    Returns factors ``P = U_Zk``, ``Q = W`` and a report carrying both the
    directly evaluated residual and the closed-form error.
    """
    t0 = time.perf_counter()
    state = compute_optimal_state(pair, k)
    factors = _make(pair, state.U_Zk, state.W, "optimal", k)
    report = FitReport(
        residual_frobenius=residual_frobenius(pair, factors),
        closed_form_error=closed_form_error(state, pair, k),
        singular_values_Z=[float(s) for s in state.svd_Z.sigma],
        wall_time=time.perf_counter() - t0,
    )
    return factors, report


# -- truncated ---------------------------------------------------------------


def fit_truncated(pair, k):
    """Rank-k truncated SVD of the unconstrained least-squares solution ``Y X^+``.

    With ``C = Y V_X S_X^+`` we have ``Y X^+ = C U_X^T``; since ``U_X`` has
    orthonormal columns the SVD of ``C`` gives that of ``Y X^+``.
    """
    k = _check_k(pair, k)
    t0 = time.perf_counter()
    svd_X = economy_svd(pair.X)
    C = (pair.Y @ svd_X.V) * svd_X.sigma_pinv()
    svd_C = economy_svd(C)
    Uk, sk, Vk = svd_C.truncate(k)
    factors = _make(pair, Uk, (svd_X.U @ Vk) * sk, "truncated", k)
    report = FitReport(residual_frobenius(pair, factors), wall_time=time.perf_counter() - t0)
    return factors, report


# -- projected ---------------------------------------------------------------


def _projected_reduction(pair):
    """Rank-restricted SVD of X and ``B = U_X^T Y V_X`` on that subspace."""
    svd_X = economy_svd(pair.X)
    rx = svd_X.numerical_rank
    Ur, sr, Vr = svd_X.truncate(rx)
    B = Ur.T @ pair.Y @ Vr
    return Ur, sr, Vr, B


def fit_projected(pair, k):
    """Projected DMD: Eckart-Young truncation of ``B = U_X^T Y V_X``.

    Assumes ``A X`` lies in the span of X. Only the numerically nonzero part
    of the SVD of X is used, so for rank-deficient X the effective rank is
    ``min(k, rank X)``.
    """
    k = _check_k(pair, k)
    t0 = time.perf_counter()
    Ur, sr, _, B = _projected_reduction(pair)
    kk = min(k, len(sr))
    if kk == 0:
        n = pair.n
        factors = _make(pair, np.zeros((n, 0)), np.zeros((n, 0)), "projected", k)
    else:
        svd_B = economy_svd(B)
        Ub, sb, Vb = svd_B.truncate(kk)
        P = Ur @ Ub
        Q = Ur @ ((Vb * sb) / sr[:, None])
        factors = _make(pair, P, Q, "projected", k)
    report = FitReport(residual_frobenius(pair, factors), wall_time=time.perf_counter() - t0)
    return factors, report


# -- sparse ------------------------------------------------------------------


@dataclass
class _SparseProblem:
    """Quadratic model ``f(a) = ||Y||^2 - 2 Re(a^H q) + a^H G a`` for mode amplitudes."""

    Ur: np.ndarray
    modes: np.ndarray  # reduced right eigenvectors, zeta_i = Ur @ modes[:, i]
    rows_left: np.ndarray  # reduced left rows, nu_i = lam_i * left[i] @ Ur^T
    eigenvalues: np.ndarray
    G: np.ndarray
    q: np.ndarray
    y_norm2: float

    def objective(self, a):
        quad = np.real(np.conj(a) @ self.G @ a)
        return float(self.y_norm2 - 2 * np.real(np.vdot(a, self.q)) + quad)


def _sparse_problem(pair):
    Ur, sr, Vr, B = _projected_reduction(pair)
    if len(sr) == 0:
        z = np.zeros(0, complex)
        return _SparseProblem(Ur, np.zeros((0, 0), complex), np.zeros((0, 0), complex), z,
                              np.zeros((0, 0), complex), z, float(np.sum(pair.Y ** 2)))
    A_red = B / sr[None, :]
    lam, Ve = np.linalg.eig(A_red)
    lam = lam.astype(complex)
    Ve = Ve.astype(complex)
    left = np.linalg.solve(Ve, np.eye(len(lam)))  # rows are reduced left vectors
    # nu_i = lam_i * xi_i^T X with xi_i^T X = left_i U_r^T X = left_i diag(s) V^T
    N_red = (lam[:, None] * left) * sr[None, :]  # nu_i = N_red[i] @ V_r^T
    G = (Ve.conj().T @ Ve) * np.conj(N_red @ N_red.conj().T)
    q = np.einsum("ji,jk,ik->i", Ve.conj(), B, N_red.conj())
    return _SparseProblem(Ur, Ve, lam[:, None] * left, lam, G, q, float(np.sum(pair.Y ** 2)))


def sparse_gamma_max(pair):
    """Smallest penalty weight for which all amplitudes are zero."""
    prob = _sparse_problem(pair)
    if prob.q.size == 0:
        return 0.0
    return float(2 * np.max(np.abs(prob.q)))


def _soft_threshold(a, t):
    mag = np.abs(a)
    scale = np.where(mag > t, 1 - t / np.where(mag > 0, mag, 1), 0.0)
    return a * scale


def _fista(prob, gamma, max_iters=5000, tol=1e-8, init=None):
    size = prob.q.size
    L = 2 * float(np.max(np.linalg.eigvalsh((prob.G + prob.G.conj().T) / 2))) if size else 0.0
    a = np.zeros(size, complex) if init is None else init.copy()
    if L <= 0:
        return np.zeros(size, complex), 0
    step = 1.0 / L
    y, t = a.copy(), 1.0
    obj = prob.objective(a) + gamma * np.sum(np.abs(a))
    for it in range(1, max_iters + 1):
        grad = 2 * (prob.G @ y - prob.q)
        a_new = _soft_threshold(y - step * grad, gamma * step)
        t_new = (1 + np.sqrt(1 + 4 * t * t)) / 2
        y = a_new + ((t - 1) / t_new) * (a_new - a)
        a, t = a_new, t_new
        new_obj = prob.objective(a) + gamma * np.sum(np.abs(a))
        if abs(obj - new_obj) <= tol * max(1.0, abs(new_obj)):
            return a, it
        obj = new_obj
    return a, max_iters


def _conjugate_partner(lam, i, used):
    target = np.conj(lam[i])
    best, dist = None, np.inf
    for j in range(len(lam)):
        if j == i or j in used:
            continue
        d = abs(lam[j] - target)
        if d < dist:
            best, dist = j, d
    return best


def _mode_groups(lam):
    """Group indices into real modes and conjugate pairs."""
    scale = max(1.0, float(np.max(np.abs(lam)))) if lam.size else 1.0
    groups, used = [], set()
    for i in range(len(lam)):
        if i in used:
            continue
        if abs(lam[i].imag) <= 1e-10 * scale:
            groups.append((i,))
            used.add(i)
        else:
            j = _conjugate_partner(lam, i, used)
            groups.append((i,) if j is None else (i, j))
            used.update((i,) if j is None else (i, j))
    return groups


def _polish(prob, support):
    """Least-squares amplitudes restricted to `support`."""
    a = np.zeros(prob.q.size, complex)
    if support:
        idx = np.array(support)
        G = prob.G[np.ix_(idx, idx)]
        a[idx] = np.linalg.lstsq(G, prob.q[idx], rcond=None)[0]
    return a


def _sparse_factors(pair, prob, a, groups, k):
    cols_p, cols_q = [], []
    for g in groups:
        i = g[0]
        if a[i] == 0:
            continue
        u = prob.Ur @ (a[i] * prob.modes[:, i])
        v = prob.Ur @ prob.rows_left[i]
        if len(g) == 1:
            cols_p.append(u.real)
            cols_q.append(v.real)
        else:
            cols_p += [u.real, u.imag]
            cols_q += [2 * v.real, -2 * v.imag]
    n = pair.n
    P = np.column_stack(cols_p) if cols_p else np.zeros((n, 0))
    Q = np.column_stack(cols_q) if cols_q else np.zeros((n, 0))
    return _make(pair, P, Q, "sparse", k)


def default_gamma_grid(pair, num=41):
    """Log grid from ``1e-10 * gamma_max`` up to ``gamma_max``."""
    gmax = sparse_gamma_max(pair)
    if gmax == 0:
        return [1.0]
    return list(gmax * np.logspace(-10, 0, num))


def fit_sparse(pair, k, gamma_grid=None, amp_tol=1e-6, max_iters=5000, tol=1e-8, polish=True):
    """Sparsity-promoting selection of k eigenmodes of the full projected operator.

    Stage one diagonalizes the projected operator of maximal rank. Stage two
    solves ``min_a ||Y - sum_i a_i zeta_i nu_i||_F^2 + gamma ||a||_1`` by
    accelerated proximal gradient for each ``gamma`` in `gamma_grid`
    (ascending) and keeps the smallest one leaving at most `k` amplitudes
    above `amp_tol`; ``nu_i = lambda_i xi_i^T X``, so ``a = 1`` reproduces
    the full projected fit. With `polish` the surviving amplitudes are then
    refit by unpenalized least squares. Conjugate pairs share one complex
    amplitude and are emitted as two real factor columns.

    Raises
    ------
    GammaGridExhausted
        If every ``gamma`` keeps more than `k` modes. ``exc.result`` holds the
        sparsest attempt.
    """
    k = _check_k(pair, k)
    t0 = time.perf_counter()
    if gamma_grid is None:
        gamma_grid = default_gamma_grid(pair)
    grid = sorted(float(g) for g in gamma_grid)
    if not grid or grid[0] < 0:
        raise InvalidInput("gamma_grid must be a nonempty list of nonnegative reals")
    prob = _sparse_problem(pair)
    groups = _mode_groups(prob.eigenvalues)

    chosen, warm = None, None
    for gamma in grid:
        a, iters = _fista(prob, gamma, max_iters=max_iters, tol=tol, init=warm)
        warm = a.copy()
        # tie conjugate partners so the factored operator stays real
        for g in groups:
            if len(g) == 2:
                i, j = g
                a[i] = (a[i] + np.conj(a[j])) / 2
                a[j] = np.conj(a[i])
        active = [g for g in groups if abs(a[g[0]]) > amp_tol]
        count = sum(len(g) for g in active)
        chosen = (gamma, a, iters, active, count)
        if count <= k:
            break

    gamma, a, iters, active, count = chosen
    support = [i for g in active for i in g]
    if polish:
        a = _polish(prob, support)
    else:
        mask = np.zeros(a.size, bool)
        mask[support] = True
        a = np.where(mask, a, 0)
    factors = _sparse_factors(pair, prob, a, active, k)
    report = FitReport(
        residual_frobenius(pair, factors),
        iterations=iters,
        wall_time=time.perf_counter() - t0,
        hyperparams={"gamma": gamma, "modes_selected": count},
        converged=count <= k,
    )
    if count > k:
        raise GammaGridExhausted(
            f"no gamma in grid keeps <= {k} modes (sparsest kept {count})", result=(factors, report)
        )
    return factors, report


# -- total least squares -----------------------------------------------------


def fit_tls(pair, k):
    """TLS DMD: ``Y V_K^k (V_K^k)^T X^+`` with ``K = [X; Y]``.

    This solves a different (unconstrained) problem and does not bound
    ``rank(A)`` by design; the achieved rank is recorded in ``factors.r``.
    """
    k = _check_k(pair, k, upper=min(2 * pair.n, pair.m))
    t0 = time.perf_counter()
    svd_K = economy_svd(np.vstack([pair.X, pair.Y]))
    Vk = svd_K.V[:, :k]
    svd_X = economy_svd(pair.X)
    Qt = _pinv_apply_right(svd_X, Vk.T)
    factors = _make(pair, pair.Y @ Vk, Qt.T, "tls", k)
    report = FitReport(residual_frobenius(pair, factors), wall_time=time.perf_counter() - t0)
    return factors, report


# -- nuclear norm ------------------------------------------------------------


@dataclass(frozen=True)
class AdmmConfig:
    rho: float = 1.0
    max_iters: int = 5000
    tol_abs: float = 1e-8
    tol_rel: float = 1e-6

    def __post_init__(self):
        if not (self.rho > 0 and self.max_iters >= 1 and self.tol_abs >= 0 and self.tol_rel >= 0):
            raise InvalidInput(f"invalid ADMM configuration {self}")


@dataclass
class _NuclearReduction:
    """Coordinates in which the nuclear-norm problem is solved.

    The minimizer has the form ``A = Qy C Ur^T`` with ``Qy`` spanning range(Y)
    and ``Ur`` range(X); the norm and the fit are invariant under that change
    of basis, so ADMM runs on the small matrix ``C``.
    """

    Qy: np.ndarray
    Ur: np.ndarray
    Yt: np.ndarray  # Qy^T Y
    Xt: np.ndarray  # Ur^T X
    YXt: np.ndarray
    XXt: np.ndarray
    scale: float  # ||Y X^T||_2


def _nuclear_reduction(pair):
    svd_X = economy_svd(pair.X)
    svd_Y = economy_svd(pair.Y)
    Ur = svd_X.U[:, : svd_X.numerical_rank]
    Qy = svd_Y.U[:, : svd_Y.numerical_rank]
    Yt = Qy.T @ pair.Y
    Xt = Ur.T @ pair.X
    YXt = Yt @ Xt.T
    scale = float(np.linalg.norm(YXt, 2)) if YXt.size else 0.0
    return _NuclearReduction(Qy, Ur, Yt, Xt, YXt, Xt @ Xt.T, scale)


def _svt(M, thresh):
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    s = np.maximum(s - thresh, 0.0)
    return U, s, Vt


def _admm(red, alpha, cfg, warm=None):
    """ADMM on ``1/2 ||Yt - C Xt||^2 + alpha ||C||_*``.

    Returns ``(U, s, Vt, iterations, converged, residuals, state)`` where
    ``U s Vt`` is the thresholded iterate ``B`` and ``state = (B, dual)``
    can warm-start a later call.
    """
    shape = red.YXt.shape
    rho = cfg.rho
    inv = np.linalg.inv(red.XXt + rho * np.eye(shape[1]))
    if warm is None:
        B = np.zeros(shape)
        Ud = np.zeros(shape)
    else:
        B, Ud = warm[0].copy(), warm[1].copy()
    root = np.sqrt(B.size)
    U = s = Vt = None
    r_norm = s_norm = np.inf
    for it in range(1, cfg.max_iters + 1):
        A = (red.YXt + rho * (B - Ud)) @ inv
        B_prev = B
        U, s, Vt = _svt(A + Ud, alpha / rho)
        B = (U * s) @ Vt
        Ud = Ud + A - B
        r_norm = np.linalg.norm(A - B)
        s_norm = rho * np.linalg.norm(B - B_prev)
        eps_pri = root * cfg.tol_abs + cfg.tol_rel * max(np.linalg.norm(A), np.linalg.norm(B))
        eps_dual = root * cfg.tol_abs + cfg.tol_rel * rho * np.linalg.norm(Ud)
        if r_norm <= eps_pri and s_norm <= eps_dual:
            return U, s, Vt, it, True, (float(r_norm), float(s_norm)), (B, Ud)
    return U, s, Vt, cfg.max_iters, False, (float(r_norm), float(s_norm)), (B, Ud)


def _nuclear_factors(pair, red, U, s, Vt, k_requested):
    keep = s > 0
    P = red.Qy @ U[:, keep]
    Q = red.Ur @ (Vt[keep].T * s[keep])
    return _make(pair, P, Q, "nuclear", k_requested)


def fit_nuclear(pair, alpha, admm_cfg=None, _warm=None):
    """Nuclear-norm regularized least squares solved by ADMM.

    Minimizes ``1/2 ||Y - A X||_F^2 + alpha ||A||_*`` with the splitting
    ``A = B``: ridge-type A-update, singular value soft-thresholding of B at
    ``alpha / rho``, scaled dual update. The problem is solved in the
    coordinates of range(Y) x range(X), which carry the whole minimizer.

    Raises
    ------
    NotConverged
        When `admm_cfg.max_iters` is reached; ``exc.last_iterate`` holds the
        ``(factors, report)`` of the last iterate.
    """
    if not (np.isfinite(alpha) and alpha > 0):
        raise InvalidInput(f"alpha must be a positive real, got {alpha!r}")
    cfg = admm_cfg or AdmmConfig()
    t0 = time.perf_counter()
    red = _nuclear_reduction(pair)
    factors, report, _ = _fit_nuclear_reduced(pair, red, alpha, cfg, min(pair.n, pair.m), t0)
    if not report.converged:
        raise NotConverged(
            f"ADMM did not converge in {cfg.max_iters} iterations",
            last_iterate=(factors, report),
            residuals=report.hyperparams["final_residuals"],
        )
    return factors, report


def _fit_nuclear_reduced(pair, red, alpha, cfg, k_requested, t0, warm=None):
    if red.YXt.size == 0:
        n = pair.n
        factors = _make(pair, np.zeros((n, 0)), np.zeros((n, 0)), "nuclear", k_requested)
        report = FitReport(residual_frobenius(pair, factors), iterations=0,
                           hyperparams={"alpha": alpha, "rho": cfg.rho, "final_residuals": [0.0, 0.0]})
        return factors, report, None
    U, s, Vt, iters, ok, res, state = _admm(red, alpha, cfg, warm)
    factors = _nuclear_factors(pair, red, U, s, Vt, k_requested)
    report = FitReport(
        residual_frobenius(pair, factors),
        iterations=iters,
        wall_time=time.perf_counter() - t0,
        hyperparams={"alpha": float(alpha), "rho": cfg.rho, "final_residuals": list(res)},
        converged=ok,
    )
    return factors, report, state


def fit_nuclear_target_rank(pair, k, admm_cfg=None, bracket=(1e-8, 10.0), max_bisections=40, rtol=1e-3):
    """Nuclear-norm fit whose weight is tuned to reach rank at most `k`.

    Bisects ``log(alpha)`` inside ``bracket * ||Y X^T||_2`` for the smallest
    weight whose solution has rank ``<= k``, stopping after `max_bisections`
    halvings or once the bracket is within a factor ``1 + rtol``.

    Raises
    ------
    AlphaBracketFailure
        If the upper end of the bracket still yields rank above `k`.
    """
    k = _check_k(pair, k)
    cfg = admm_cfg or AdmmConfig()
    t0 = time.perf_counter()
    red = _nuclear_reduction(pair)
    if red.scale == 0:
        return _fit_nuclear_reduced(pair, red, 1.0, cfg, k, t0)[:2]
    lo, hi = bracket[0] * red.scale, bracket[1] * red.scale

    def run(alpha, warm=None):
        return _fit_nuclear_reduced(pair, red, alpha, cfg, k, t0, warm)

    f_lo, r_lo, st_lo = run(lo)
    if f_lo.r <= k:
        return f_lo, _finish(r_lo, t0, 0)
    f_hi, r_hi, st_hi = run(hi)
    if f_hi.r > k:
        raise AlphaBracketFailure(f"rank {f_hi.r} > {k} even at alpha={hi:.3g}")
    steps = 0
    while steps < max_bisections and hi / lo > 1 + rtol:
        mid = float(np.sqrt(lo * hi))
        f_mid, r_mid, st_mid = run(mid, warm=st_hi)
        steps += 1
        if f_mid.r <= k:
            hi, f_hi, r_hi, st_hi = mid, f_mid, r_mid, st_mid
        else:
            lo = mid
    return f_hi, _finish(r_hi, t0, steps)


def _finish(report, t0, steps):
    report.wall_time = time.perf_counter() - t0
    report.hyperparams["bisection_steps"] = steps
    return report


def fit(pair, method, k=None, **options):
    """Dispatch to the estimator named `method`."""
    if method == "optimal":
        return fit_optimal(pair, k)
    if method == "truncated":
        return fit_truncated(pair, k)
    if method == "projected":
        return fit_projected(pair, k)
    if method == "sparse":
        return fit_sparse(pair, k, gamma_grid=options.get("gamma_grid"))
    if method == "tls":
        return fit_tls(pair, k)
    if method == "nuclear":
        cfg = options.get("admm_cfg")
        if options.get("alpha") is not None:
            return fit_nuclear(pair, options["alpha"], cfg)
        return fit_nuclear_target_rank(pair, k, cfg)
    raise InvalidInput(f"unknown method {method!r}; expected one of {METHODS}")


__all__ = [
    "METHODS",
    "AdmmConfig",
    "FitReport",
    "LowRankFactors",
    "OptimalSolverState",
    "SnapshotPair",
    "closed_form_error",
    "compute_optimal_state",
    "default_gamma_grid",
    "fit",
    "fit_nuclear",
    "fit_nuclear_target_rank",
    "fit_optimal",
    "fit_projected",
    "fit_sparse",
    "fit_tls",
    "fit_truncated",
    "residual_frobenius",
    "sparse_gamma_max",
]
