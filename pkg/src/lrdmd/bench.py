"""Independent oracle, analytic fixtures, estimator comparison and timing.

The alternating-least-squares oracle deliberately uses plain ``numpy.linalg``
least squares rather than the package's SVD kernels, so agreement with the
closed-form solver is evidence from two unrelated code paths. ALS can stall
in local minima; restarts make that unlikely but agreement is not a proof.
"""

import csv
import io
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, LrdmdError
from .estimators import METHODS, AdmmConfig, fit, fit_optimal
from .rom import simulate_spectral
from .snapshots import SnapshotPair
from .spectral import evd_lowrank

APPENDIX_X = {
    "X1": np.array([[1.0, 0.0], [0.0, 10.0], [1.0, 10.0]]),
    "X2": np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
}


def appendix_case(which, epsilon=0.0):
    """3 x 2 analytic example: ``X`` in {X1, X2}, ``Y = [[5, 0], [eps, 2], [10, 0]]``."""
    if which not in APPENDIX_X:
        raise InvalidInput(f"appendix case must be X1 or X2, got {which!r}")
    Y = np.array([[5.0, 0.0], [float(epsilon), 2.0], [10.0, 0.0]])
    return SnapshotPair(APPENDIX_X[which].copy(), Y)


def random_instance(rng, n_range=(3, 12), m_max=8, rank_deficient=False):
    """Gaussian snapshot pair with ``m <= n``; optionally rank-deficient X."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    m = int(rng.integers(2, min(n, m_max) + 1))
    X = rng.standard_normal((n, m))
    if rank_deficient:
        X[:, -1] = X[:, :-1] @ rng.standard_normal(m - 1)
    Y = rng.standard_normal((n, m))
    return SnapshotPair(X, Y)


def random_instances(count, seed=0, deficient_every=5, **kwargs):
    """`count` instances with a random k each; every `deficient_every`-th X is rank deficient."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        deficient = bool(deficient_every) and i % deficient_every == deficient_every - 1
        pair = random_instance(rng, rank_deficient=deficient, **kwargs)
        k = int(rng.integers(1, pair.m + 1))
        out.append((pair, k))
    return out


# -- ALS oracle --------------------------------------------------------------


def als_oracle(pair, k, restarts=50, max_iters=5000, seed=0, rtol=1e-12):
    """Best residual of ``||Y - P Q^T X||_F`` found by alternating least squares.

    Each restart draws Gaussian ``P``, ``Q`` and alternates the two exact
    least-squares updates ``P = Y G^+`` with ``G = Q^T X``, and
    ``Q^T = P^+ Y X^+``, until the relative objective change drops below
    `rtol`. The objective is asserted nonincreasing at every sweep.
    """
    n, m = pair.n, pair.m
    if n * m > 10_000:
        raise InvalidInput(f"ALS oracle is meant for small instances, got n*m={n * m}")
    if restarts < 1:
        raise InvalidInput("restarts must be >= 1")
    X, Y = pair.X, pair.Y
    X_pinv = np.linalg.pinv(X)
    YXp = Y @ X_pinv
    floor = 1e-12 * max(float(np.linalg.norm(Y)), 1e-300)
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(restarts):
        Q = rng.standard_normal((n, k))
        prev = np.inf
        for _ in range(max_iters):
            G = Q.T @ X
            P = np.linalg.lstsq(G.T, Y.T, rcond=None)[0].T
            Qt = np.linalg.lstsq(P, YXp, rcond=None)[0]
            Q = Qt.T
            obj = float(np.linalg.norm(Y - P @ (Qt @ X)))
            # round-off floor: residuals near zero jitter at ~eps * ||Y||
            assert obj <= prev * (1 + 1e-10) + floor, f"ALS objective increased: {prev} -> {obj}"
            if prev - obj <= rtol * obj or obj <= floor:
                prev = obj
                break
            prev = obj
        best = min(best, prev)
    return best


# -- comparison --------------------------------------------------------------

REPORT_COLUMNS = (
    "estimator",
    "k",
    "residual",
    "closed_form_error",
    "achieved_rank",
    "dominant_eigenvalue_re",
    "dominant_eigenvalue_im",
    "iterations",
    "hyperparams",
    "error",
)


@dataclass
class ComparisonRow:
    estimator: str
    k: int
    residual: float | None = None
    closed_form_error: float | None = None
    achieved_rank: int | None = None
    dominant_eigenvalue: complex | None = None
    iterations: int | None = None
    hyperparams: dict = field(default_factory=dict)
    wall_time: float | None = None
    error: str | None = None

    def as_record(self, with_timing=False):
        lam = self.dominant_eigenvalue
        rec = {
            "estimator": self.estimator,
            "k": self.k,
            "residual": self.residual,
            "closed_form_error": self.closed_form_error,
            "achieved_rank": self.achieved_rank,
            "dominant_eigenvalue_re": None if lam is None else float(lam.real),
            "dominant_eigenvalue_im": None if lam is None else float(lam.imag),
            "iterations": self.iterations,
            "hyperparams": self.hyperparams,
            "error": self.error,
        }
        if with_timing:
            rec["wall_time"] = self.wall_time
        return rec


@dataclass
class ComparisonReport:
    rows: list

    def row(self, estimator, k):
        for r in self.rows:
            if r.estimator == estimator and r.k == k:
                return r
        raise KeyError((estimator, k))

    def best_per_k(self):
        """Smallest residual per k among rows that ran successfully."""
        out = {}
        for r in self.rows:
            if r.residual is not None:
                out[r.k] = min(out.get(r.k, np.inf), r.residual)
        return out

    def to_json_obj(self, with_timing=False):
        return [r.as_record(with_timing) for r in self.rows]

    def to_csv(self, with_timing=False):
        cols = list(REPORT_COLUMNS) + (["wall_time"] if with_timing else [])
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        for rec in self.to_json_obj(with_timing):
            rec = dict(rec)
            rec["hyperparams"] = ";".join(f"{k}={v}" for k, v in sorted(rec["hyperparams"].items()))
            writer.writerow({k: ("" if v is None else (repr(v) if isinstance(v, float) else v)) for k, v in rec.items()})
        return buf.getvalue()


def _run_one(pair, method, k, options):
    row = ComparisonRow(estimator=method, k=k)
    t0 = time.perf_counter()
    try:
        factors, report = fit(pair, method, k, **options)
        row.residual = report.residual_frobenius
        row.closed_form_error = report.closed_form_error
        row.achieved_rank = factors.r
        row.iterations = report.iterations
        row.hyperparams = {k_: v for k_, v in report.hyperparams.items() if k_ != "final_residuals"}
        model = evd_lowrank(factors)
        if model.r:
            row.dominant_eigenvalue = complex(model.eigenvalues[0])
    except LrdmdError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    row.wall_time = time.perf_counter() - t0
    return row


def worker_count():
    """Pool size from ``LRDMD_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("LRDMD_THREADS", "1")))
    except ValueError:
        return 1


def compare_estimators(pair, ks, methods=METHODS, gamma_grid=None, admm_cfg=None, alpha=None):
    """Run every estimator at every k; failures are recorded per row.

    Rows are ordered by (k, method) regardless of the worker count.
    """
    options = {"gamma_grid": gamma_grid, "admm_cfg": admm_cfg or AdmmConfig(), "alpha": alpha}
    jobs = [(method, int(k)) for k in ks for method in methods]
    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda job: _run_one(pair, job[0], job[1], options), jobs))
    else:
        rows = [_run_one(pair, method, k, options) for method, k in jobs]
    return ComparisonReport(rows)


# -- timing ------------------------------------------------------------------

TIMING_COLUMNS = (
    "n",
    "m",
    "k",
    "T",
    "repeats",
    "fit_optimal_median_s",
    "simulate_spectral_median_s",
    "simulate_spectral_2T_median_s",
    "simulate_per_step_s",
)


@dataclass
class TimingSpec:
    n_list: tuple
    m: int = 20
    k: int = 5
    T: int = 50
    repeats: int = 5
    seed: int = 0


def _median_time(fn, repeats):
    fn()  # warm-up, discarded
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def timing_instance(n, m, k, seed):
    """Noisy snapshots of a random stable rank-k linear system in dimension n."""
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((n, k)))
    lam = 0.5 + 0.4 * rng.random(k)
    X = rng.standard_normal((n, m))
    Y = basis @ (lam[:, None] * (basis.T @ X)) + 1e-3 * rng.standard_normal((n, m))
    return SnapshotPair(X, Y)


def timing_bench(spec):
    """Median wall times of the off-line fit and the on-line spectral simulation.

    Returns a list of dicts with :data:`TIMING_COLUMNS` keys, one per n.
    """
    rows = []
    for n in spec.n_list:
        pair = timing_instance(int(n), spec.m, spec.k, spec.seed)
        factors, _ = fit_optimal(pair, spec.k)
        model = evd_lowrank(factors)
        theta = pair.X[:, 0].copy()
        t_fit = _median_time(lambda: fit_optimal(pair, spec.k), spec.repeats)
        t_sim = _median_time(lambda: simulate_spectral(model, theta, spec.T), spec.repeats)
        t_sim2 = _median_time(lambda: simulate_spectral(model, theta, 2 * spec.T), spec.repeats)
        rows.append({
            "n": int(n),
            "m": spec.m,
            "k": spec.k,
            "T": spec.T,
            "repeats": spec.repeats,
            "fit_optimal_median_s": t_fit,
            "simulate_spectral_median_s": t_sim,
            "simulate_spectral_2T_median_s": t_sim2,
            "simulate_per_step_s": t_sim / (spec.T - 1),
        })
    return rows


def timing_csv(rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=TIMING_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in rows:
        writer.writerow({c: r[c] for c in TIMING_COLUMNS})
    return buf.getvalue()
