"""Snapshot trajectories, the paired data matrices, and their file formats.

CSV layout::

    # optional comment lines
    n,T,N
    traj_index,time_index,v1,...,vn      (N*T lines, both indices 1-based)

Binary layout: ``b"LRDM"``, version byte ``1``, little-endian ``u64`` n, T, N,
then ``N*T*n`` little-endian ``f64`` in (trajectory, time, coordinate) order.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidInput, ParseError

MAGIC = b"LRDM"
VERSION = 1
_HEADER = struct.Struct("<4sBQQQ")


@dataclass(frozen=True)
class TrajectorySet:
    """``N`` trajectories of ``T`` states in dimension ``n``.

    ``states[i, t]`` is the state of trajectory ``i`` at time ``t + 1``.
    """

    states: np.ndarray

    def __post_init__(self):
        states = np.asarray(self.states, dtype=np.float64)
        if states.ndim != 3:
            raise InvalidInput(f"states must have shape (N, T, n), got {states.shape}")
        if min(states.shape) < 1:
            raise InvalidInput(f"empty trajectory set {states.shape}")
        if not np.all(np.isfinite(states)):
            raise InvalidInput("trajectory states contain non-finite values")
        states.setflags(write=False)
        object.__setattr__(self, "states", states)

    @property
    def N(self):
        return self.states.shape[0]

    @property
    def T(self):
        return self.states.shape[1]

    @property
    def n(self):
        return self.states.shape[2]


@dataclass(frozen=True)
class SnapshotPair:
    """Data matrices ``X`` (states) and ``Y`` (one-step successors), both n x m."""

    X: np.ndarray
    Y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        Y = np.asarray(self.Y, dtype=np.float64)
        if X.ndim != 2 or X.shape != Y.shape:
            raise InvalidInput(f"X and Y must be 2-d with equal shapes, got {X.shape} and {Y.shape}")
        if X.size == 0:
            raise InvalidInput("empty snapshot matrices")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise InvalidInput("snapshot matrices contain non-finite values")
        X.setflags(write=False)
        Y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def m(self):
        return self.X.shape[1]


def assemble_pair(ts):
    """Stack every trajectory's ``x_1..x_{T-1}`` into X and ``x_2..x_T`` into Y."""
    if ts.T < 2:
        raise InvalidInput(f"need T >= 2 to form snapshot pairs, got T={ts.T}")
    # (N, T-1, n) -> (n, N*(T-1)), trajectory-major column order
    X = ts.states[:, :-1, :].reshape(-1, ts.n).T
    Y = ts.states[:, 1:, :].reshape(-1, ts.n).T
    return SnapshotPair(X.copy(), Y.copy())


def simulate_linear_truth(A_true, thetas, T, noise_std=0.0, seed=0):
    """Generate ``x_t = A_true x_{t-1} + eta_t`` from each initial condition.

    Noise is i.i.d. Gaussian with standard deviation `noise_std`, drawn from
    ``numpy.random.default_rng(seed)`` in (trajectory, time) order. The initial
    states are noise free.
    """
    A = np.asarray(A_true, dtype=np.float64)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=np.float64))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInput(f"A_true must be square, got {A.shape}")
    if thetas.shape[1] != A.shape[0]:
        raise InvalidInput(f"initial conditions have dimension {thetas.shape[1]}, expected {A.shape[0]}")
    if T < 2:
        raise InvalidInput(f"T must be >= 2, got {T}")
    if noise_std < 0:
        raise InvalidInput(f"noise_std must be nonnegative, got {noise_std}")
    rng = np.random.default_rng(seed)
    N, n = thetas.shape
    states = np.empty((N, T, n))
    for i in range(N):
        states[i, 0] = thetas[i]
        for t in range(1, T):
            states[i, t] = A @ states[i, t - 1]
            if noise_std > 0:
                states[i, t] += noise_std * rng.standard_normal(n)
    return TrajectorySet(states)


def _fmt(x):
    return repr(float(x))


def save_snapshots(ts, path, format="csv", comments=()):
    """Write `ts` as CSV or binary. `comments` become ``#`` lines in CSV."""
    path = Path(path)
    if format == "csv":
        lines = [f"# {c}" for c in comments]
        lines.append(f"{ts.n},{ts.T},{ts.N}")
        for i in range(ts.N):
            for t in range(ts.T):
                vals = ",".join(_fmt(v) for v in ts.states[i, t])
                lines.append(f"{i + 1},{t + 1},{vals}")
        path.write_text("\n".join(lines) + "\n")
    elif format in ("bin", "binary"):
        header = _HEADER.pack(MAGIC, VERSION, ts.n, ts.T, ts.N)
        path.write_bytes(header + ts.states.astype("<f8").tobytes(order="C"))
    else:
        raise InvalidInput(f"unknown snapshot format {format!r}")


def load_snapshots(path, format=None):
    """Read a snapshot file. The format is inferred from the magic bytes if omitted."""
    path = Path(path)
    if not path.exists():
        raise InvalidInput(f"snapshot file not found: {path}")
    raw = path.read_bytes()
    if format is None:
        format = "bin" if raw[:4] == MAGIC else "csv"
    if format == "csv":
        return _parse_csv(raw.decode("utf-8", errors="replace"))
    if format in ("bin", "binary"):
        return _parse_binary(raw)
    raise InvalidInput(f"unknown snapshot format {format!r}")


def _parse_int(token, what, lineno):
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{what} is not an integer: {token!r}", f"line {lineno}") from None


def _parse_csv(text):
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(i, ln) for i, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("missing header", "line 1")
    lineno, header = lines[0]
    if header.replace(" ", "") == "n,T,N":
        lines = lines[1:]
        if not lines:
            raise ParseError("missing header values", f"line {lineno + 1}")
        lineno, header = lines[0]
    fields = header.split(",")
    if len(fields) != 3:
        raise ParseError(f"header must be 'n,T,N', got {header!r}", f"line {lineno}")
    n, T, N = (_parse_int(f, name, lineno) for f, name in zip(fields, "nTN"))
    if n < 1 or T < 1 or N < 1:
        raise ParseError(f"header values must be positive, got n={n}, T={T}, N={N}", f"line {lineno}")

    states = np.empty((N, T, n))
    seen = np.zeros((N, T), dtype=bool)
    for lineno, ln in lines[1:]:
        fields = ln.split(",")
        if len(fields) != n + 2:
            raise ParseError(f"expected {n + 2} fields, got {len(fields)}", f"line {lineno}")
        i = _parse_int(fields[0], "traj_index", lineno)
        t = _parse_int(fields[1], "time_index", lineno)
        if not (1 <= i <= N and 1 <= t <= T):
            raise ParseError(f"index ({i}, {t}) outside [1,{N}] x [1,{T}]", f"line {lineno}")
        if seen[i - 1, t - 1]:
            raise ParseError(f"duplicate entry for trajectory {i}, time {t}", f"line {lineno}")
        try:
            vals = [float(v) for v in fields[2:]]
        except ValueError:
            raise ParseError("malformed number", f"line {lineno}") from None
        if not all(np.isfinite(vals)):
            raise ParseError("non-finite value", f"line {lineno}")
        states[i - 1, t - 1] = vals
        seen[i - 1, t - 1] = True
    if not seen.all():
        i, t = np.argwhere(~seen)[0] + 1
        raise ParseError(f"missing entry for trajectory {i}, time {t}", f"line {lineno}")
    return TrajectorySet(states)


def _parse_binary(raw):
    if len(raw) < _HEADER.size:
        raise ParseError("truncated header", f"offset {len(raw)}")
    magic, version, n, T, N = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ParseError(f"bad magic {magic!r}", "offset 0")
    if version != VERSION:
        raise ParseError(f"unsupported version {version}", "offset 4")
    if min(n, T, N) < 1:
        raise ParseError(f"header values must be positive, got n={n}, T={T}, N={N}", "offset 5")
    expected = _HEADER.size + 8 * n * T * N
    if len(raw) != expected:
        raise ParseError(f"payload size mismatch: expected {expected} bytes, got {len(raw)}", f"offset {min(len(raw), expected)}")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(np.float64)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise ParseError("non-finite value", f"offset {_HEADER.size + 8 * int(bad[0])}")
    return TrajectorySet(values.reshape(N, T, n))
