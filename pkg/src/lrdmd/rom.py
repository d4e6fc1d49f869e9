"""Reduced-order model simulation."""

from dataclasses import dataclass

import numpy as np

from .errors import CapExceeded, InvalidInput, NotDiagonalizable
from .snapshots import TrajectorySet
from .spectral import DENSE_CAP

#: States with an entry above this magnitude stop the simulation.
DIVERGENCE_LIMIT = 1e150


@dataclass
class Trajectory:
    """Approximate states ``x_2 .. x_T`` started from `theta`.

    If the run diverged, `states` stops at the last finite step and
    `diverged` is set.
    """

    theta: np.ndarray
    states: np.ndarray
    diverged: bool = False
    imag_residue: float = 0.0

    @property
    def T(self):
        return self.states.shape[0] + 1

    def full(self):
        """States including ``x_1 = theta``, shape (T, n)."""
        return np.vstack([self.theta[None, :], self.states])


def _check_theta(theta, n):
    theta = np.asarray(theta)
    if theta.ndim != 1 or theta.shape[0] != n:
        raise InvalidInput(f"initial condition has shape {theta.shape}, expected ({n},)")
    return theta


def _check_T(T):
    if isinstance(T, bool) or not isinstance(T, (int, np.integer)) or T < 2:
        raise InvalidInput(f"T must be an integer >= 2, got {T!r}")
    return int(T)


def _finish(theta, states, steps, diverged):
    out = states[:steps]
    residue = 0.0
    if np.iscomplexobj(out):
        scale = max(1.0, float(np.max(np.abs(out)))) if out.size else 1.0
        residue = float(np.max(np.abs(out.imag))) / scale if out.size else 0.0
        out = out.real
    return Trajectory(theta=np.asarray(theta, dtype=np.float64), states=np.ascontiguousarray(out),
                      diverged=diverged, imag_residue=residue)


def simulate(rom, theta, T):
    """Run ``z_2 = L^T theta``, ``z_t = S z_{t-1}``, ``x_t = R z_t`` for t = 2..T.

    Complex parameters (spectral form) are propagated in complex arithmetic
    and the real part is returned; `imag_residue` records what was dropped.
    """
    T = _check_T(T)
    theta = _check_theta(theta, rom.n)
    dtype = np.result_type(rom.R, rom.L, rom.S, np.float64)
    states = np.empty((T - 1, rom.n), dtype=dtype)
    z = rom.L.T @ theta
    for step in range(T - 1):
        if step:
            z = rom.S @ z
        x = rom.R @ z
        if not np.all(np.abs(x) <= DIVERGENCE_LIMIT):
            return _finish(theta, states, step, True)
        states[step] = x
    return _finish(theta, states, T - 1, False)


def simulate_spectral(model, theta, T):
    """``x_t = sum_i zeta_i lambda_i^(t-1) xi_i^T theta`` for t = 2..T.

    Powers are accumulated by repeated multiplication, matching the
    recursion's rounding.
    """
    if not model.diagonalizable:
        raise NotDiagonalizable("spectral simulation needs a diagonalizable model")
    T = _check_T(T)
    theta = _check_theta(theta, model.n)
    coeff = model.left.T @ theta
    lam = model.eigenvalues
    states = np.empty((T - 1, model.n), dtype=complex)
    for step in range(T - 1):
        coeff = coeff * lam
        x = model.right @ coeff
        if not np.all(np.abs(x) <= DIVERGENCE_LIMIT):
            return _finish(theta, states, step, True)
        states[step] = x
    return _finish(theta, states, T - 1, False)


def dense_reference(A, theta, T, cap=DENSE_CAP):
    """Literal recursion ``x_t = A x_{t-1}``; for validation at small n."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidInput(f"A must be square, got {A.shape}")
    if A.shape[0] > cap:
        raise CapExceeded(f"dense propagation with n={A.shape[0]} exceeds cap {cap}")
    T = _check_T(T)
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (A.shape[0],):
        raise InvalidInput(f"initial condition has shape {theta.shape}, expected ({A.shape[0]},)")
    states = np.empty((T - 1, A.shape[0]))
    x = theta
    for step in range(T - 1):
        x = A @ x
        if not np.all(np.abs(x) <= DIVERGENCE_LIMIT):
            return _finish(theta, states, step, True)
        states[step] = x
    return _finish(theta, states, T - 1, False)


def trajectories_to_set(trajectories):
    """Pack equal-length trajectories (theta included) into a :class:`TrajectorySet`."""
    if not trajectories:
        raise InvalidInput("no trajectories to pack")
    lengths = {tr.T for tr in trajectories}
    if len(lengths) != 1:
        raise InvalidInput(f"trajectories have different lengths {sorted(lengths)}")
    return TrajectorySet(np.stack([tr.full() for tr in trajectories]))
