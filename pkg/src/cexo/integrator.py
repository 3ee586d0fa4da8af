"""Adaptive Dormand-Prince 5(4) integration of the oscillator flows with a
continuous audit of the conserved quantities H and G.

The pair is explicit, order 5 with an embedded order-4 error estimate,
proportional-integral step control and the standard free quartic dense
interpolant.  Blowing up is a reportable outcome, not a crash: the real
exotic oscillator genuinely diverges in momentum, so a trajectory carries a
status of "ok", "nonfinite" (state overflowed; samples end at the last valid
time) or "step-underflow" (the controller pinned the step at the floor
1e-14 * t_end without the state escaping).
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .model import (
    Params,
    State1D,
    StateND,
    eval_real_EO,
)

__all__ = ["IntegratorConfig", "Trajectory", "integrate", "integrate_real_eo", "resample"]

# Butcher tableau, error and dense-output weights of the Dormand-Prince 5(4)
# pair (Hairer, Norsett & Wanner, Solving ODEs I, DOPRI5).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_ERR = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
_D = np.array([
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
])

_SAFETY = 0.9
_BETA = 0.04
_EXPO1 = 0.2 - _BETA * 0.75
_MAX_FLOOR_ACCEPTS = 10_000
_MAX_STEPS = 5_000_000


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances, horizon and output cadence for one integration."""

    t_end: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = 1.0
    sample_interval: float = 0.02

    def __post_init__(self):
        if not (self.rel_tol > 0.0 and self.abs_tol > 0.0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if not self.t_end > 0.0:
            raise ValueError("t_end must be positive")
        if not (0.0 < self.sample_interval <= self.t_end):
            raise ValueError("need 0 < sample_interval <= t_end")
        if not self.max_step > 0.0:
            raise ValueError("max_step must be positive")


class DenseOutput:
    """Piecewise quartic interpolant collected from the accepted steps."""

    def __init__(self, ts, rcont):
        self.ts = np.asarray(ts)          # shape (S+1,), strictly increasing
        self.rcont = np.asarray(rcont)    # shape (S, 5, D)

    @property
    def t_last(self):
        return float(self.ts[-1])

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.searchsorted(self.ts, t_arr, side="right") - 1
        idx = np.clip(idx, 0, len(self.ts) - 2)
        h = self.ts[idx + 1] - self.ts[idx]
        theta = ((t_arr - self.ts[idx]) / h)[:, None]
        r = self.rcont[idx]  # (m, 5, D)
        om = 1.0 - theta
        y = r[:, 0] + theta * (r[:, 1] + om * (r[:, 2] + theta * (r[:, 3] + om * r[:, 4])))
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return y[0]
        return y

    def transformed(self, matrix):
        """Dense output of the linearly transformed solution."""
        rcont = np.einsum("ij,skj->ski", matrix, self.rcont)
        return DenseOutput(self.ts, rcont)


@dataclass
class Trajectory:
    """Sampled solution with recomputed conserved-quantity drift.

    max_H_drift / max_G_drift are max_t |H(state_t) - H(state_0)| over the
    emitted samples, recomputed from the states, never trusted from the
    stepper.  status records how the run ended; on "nonfinite" the samples
    stop at the last valid time t_last < t_end.
    """

    times: np.ndarray
    states: np.ndarray
    H0: float
    G0: float
    max_H_drift: float
    max_G_drift: float
    status: str
    t_last: float
    kind: str
    params: Params
    dense: DenseOutput | None = field(repr=False, default=None)
    projection_only: bool = False

    @property
    def n_samples(self):
        return len(self.times)

    def state_at(self, t):
        if self.dense is None:
            raise ValueError("trajectory has no dense output")
        return self.dense(t)

    def xy(self):
        """(x, y) projection of the samples (real/imaginary parts of z)."""
        if self.kind == "real-eo":
            return np.column_stack([self.states[:, 0], np.zeros(len(self.times))])
        n = 1 if self.kind == "ceo1d" else self.states.shape[1] // 4
        if self.kind == "ceo1d":
            return self.states[:, [0, 2]]
        return np.column_stack([self.states[:, 0], self.states[:, 2 * n]])

    def h_series(self):
        return _h_of(self.kind, self.params, self.states)

    def g_series(self):
        return _g_of(self.kind, self.params, self.states)


def _h_of(kind, params, states):
    a, b = params.a, params.b
    if kind == "real-eo":
        x, p = states[:, 0], states[:, 1]
        return 0.5 * p * p * (1.0 - b * x * x) + 0.5 * a * x * x
    if kind == "ceo1d":
        x, p, y, q = states.T
        r2 = x * x - y * y
        return 0.5 * (a * r2 + (p * p - q * q) * (1.0 - b * r2) - 4.0 * b * x * y * p * q)
    n = states.shape[1] // 4
    x, p, y, q = states[:, :n], states[:, n:2 * n], states[:, 2 * n:3 * n], states[:, 3 * n:]
    xp = np.einsum("ij,ij->i", x, p)
    yq = np.einsum("ij,ij->i", y, q)
    xq = np.einsum("ij,ij->i", x, q)
    yp = np.einsum("ij,ij->i", y, p)
    quart = xp * xp + yq * yq - xq * xq - yp * yp + 2 * xp * yq + 2 * xq * yp
    return 0.5 * (np.einsum("ij,ij->i", p, p) - np.einsum("ij,ij->i", q, q)
                  + a * (np.einsum("ij,ij->i", x, x) - np.einsum("ij,ij->i", y, y))
                  - b * quart)


def _g_of(kind, params, states):
    a, b = params.a, params.b
    if kind == "real-eo":
        return np.zeros(len(states))
    if kind == "ceo1d":
        x, p, y, q = states.T
        return x * y * (a - b * (p * p - q * q)) - p * q * (1.0 - b * (x * x - y * y))
    n = states.shape[1] // 4
    x, p, y, q = states[:, :n], states[:, n:2 * n], states[:, 2 * n:3 * n], states[:, 3 * n:]
    xp = np.einsum("ij,ij->i", x, p)
    yq = np.einsum("ij,ij->i", y, q)
    xq = np.einsum("ij,ij->i", x, q)
    yp = np.einsum("ij,ij->i", y, p)
    return (-np.einsum("ij,ij->i", p, q) + a * np.einsum("ij,ij->i", x, y)
            - b * (xp * yp - xp * xq + yp * yq - xq * yq))


def _rhs_1d(params):
    a, b = params.a, params.b

    def rhs(y_):
        x, p, y, q = y_
        r2 = x * x - y * y
        pq2 = p * p - q * q
        return np.array([
            p * (1.0 - b * r2) - 2.0 * b * x * y * q,
            b * x * pq2 + 2.0 * b * y * p * q - a * x,
            -q * (1.0 - b * r2) - 2.0 * b * x * y * p,
            -b * y * pq2 + 2.0 * b * x * p * q + a * y,
        ])

    return rhs


def _rhs_nd(params, n):
    a, b = params.a, params.b

    def rhs(y_):
        x, p, y, q = y_[:n], y_[n:2 * n], y_[2 * n:3 * n], y_[3 * n:]
        u = x @ p + y @ q
        v = y @ p - x @ q
        return np.concatenate([
            p - b * (u * x - v * y),
            -a * x + b * (u * p + v * q),
            -q - b * (u * y + v * x),
            a * y + b * (u * q - v * p),
        ])

    return rhs


def _rhs_real_eo(params):
    a, b = params.a, params.b

    def rhs(y_):
        x, p = y_
        return np.array([p * (1.0 - b * x * x), b * x * p * p - a * x])

    return rhs


def _initial_step(rhs, y0, f0, scale, t_end, max_step):
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = rhs(y1)
    if not np.all(np.isfinite(f1)):
        return min(1e-6, max_step, t_end)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step, t_end)


def _integrate_core(rhs, y0, cfg):
    """Run the stepper; returns (status, dense_output)."""
    t_end = cfg.t_end
    floor = 1e-14 * t_end
    y = np.asarray(y0, dtype=float)
    f = rhs(y)
    if not np.all(np.isfinite(f)):
        raise ValueError("right-hand side not finite at the initial state")
    scale0 = cfg.abs_tol + cfg.rel_tol * np.abs(y)
    h = _initial_step(rhs, y, f, scale0, t_end, cfg.max_step)

    t = 0.0
    status = "ok"
    facold = 1e-4
    last_rejected = False
    floor_accepts = 0
    ts = [0.0]
    rconts = []
    k = np.empty((7, y.size))
    k[0] = f

    steps = 0
    while t < t_end:
        steps += 1
        if steps > _MAX_STEPS:
            raise RuntimeError("step budget exhausted; dynamics too stiff for this scheme")
        h = min(h, cfg.max_step, t_end - t)
        at_floor = False
        if h < floor:
            h = min(floor, t_end - t)
            at_floor = True

        for i in range(1, 7):
            k[i] = rhs(y + h * (_A[i] @ k[:i]))
        y_new = y + h * (_B5 @ k)
        err_vec = h * (_ERR @ k)

        finite = np.all(np.isfinite(y_new)) and np.all(np.isfinite(err_vec))
        if not finite:
            if at_floor:
                status = "nonfinite"
                break
            h = max(0.25 * h, floor)
            last_rejected = True
            continue

        sc = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / sc) ** 2)))

        if err <= 1.0 or at_floor:
            # dense-output coefficients for this step
            ydiff = y_new - y
            bspl = h * k[0] - ydiff
            rconts.append(np.stack([
                y.copy(),
                ydiff,
                bspl,
                ydiff - h * k[6] - bspl,
                h * (_D @ k),
            ]))
            t += h
            ts.append(t)
            y = y_new
            k[0] = k[6]  # FSAL

            if at_floor and err > 1.0:
                floor_accepts += 1
                if floor_accepts > _MAX_FLOOR_ACCEPTS:
                    status = "step-underflow"
                    break
            else:
                floor_accepts = 0

            if err == 0.0:
                fac = 0.1
            else:
                fac = err ** _EXPO1 / facold ** _BETA
                fac = min(5.0, max(0.1, fac / _SAFETY))
            h_new = h / fac
            if last_rejected:
                h_new = min(h_new, h)
            h = h_new
            facold = max(err, 1e-4)
            last_rejected = False
        else:
            # k[0] still holds f(y); only the trial stages are discarded
            fac = min(5.0, err ** _EXPO1 / _SAFETY)
            h = max(h / fac, floor)
            last_rejected = True

    if len(ts) < 2:
        raise RuntimeError("no step could be completed from the initial state")
    return status, DenseOutput(np.array(ts), np.array(rconts))


def _sample_grid(t_last, interval):
    n = int(np.floor(t_last / interval + 1e-9))
    grid = np.arange(n + 1) * interval
    if grid[-1] < t_last * (1.0 - 1e-12):
        grid = np.append(grid, t_last)
    else:
        grid[-1] = min(grid[-1], t_last)
    if len(grid) < 2:
        grid = np.array([0.0, t_last])
    return grid


def _build(kind, params, status, dense, cfg):
    grid = _sample_grid(dense.t_last, cfg.sample_interval)
    states = dense(grid)
    h_t = _h_of(kind, params, states)
    g_t = _g_of(kind, params, states)
    return Trajectory(
        times=grid,
        states=states,
        H0=float(h_t[0]),
        G0=float(g_t[0]),
        max_H_drift=float(np.max(np.abs(h_t - h_t[0]))),
        max_G_drift=float(np.max(np.abs(g_t - g_t[0]))),
        status=status,
        t_last=dense.t_last,
        kind=kind,
        params=params,
        dense=dense,
    )


def integrate(params, s0, cfg):
    """Integrate the complexified flow from a State1D or StateND."""
    if isinstance(s0, State1D):
        rhs = _rhs_1d(params)
        y0 = s0.as_array()
        kind = "ceo1d"
    elif isinstance(s0, StateND):
        if s0.dim == 1:
            return integrate(params, State1D(*(float(v[0]) for v in (s0.x, s0.p, s0.y, s0.q))), cfg)
        rhs = _rhs_nd(params, s0.dim)
        y0 = s0.as_array()
        kind = "ceond"
    else:
        raise TypeError(f"unsupported state type {type(s0).__name__}")
    status, dense = _integrate_core(rhs, y0, cfg)
    return _build(kind, params, status, dense, cfg)


def integrate_real_eo(params, x0, p0, cfg):
    """Integrate the real exotic oscillator on the (x, p) plane.

    Momentum blowup (the generic fate for a = 0) ends the run with status
    "nonfinite" at the last valid time.
    """
    rhs = _rhs_real_eo(params)
    status, dense = _integrate_core(rhs, np.array([x0, p0], dtype=float), cfg)
    traj = _build("real-eo", params, status, dense, cfg)
    return traj


def resample(traj, n_points):
    """Uniform-in-time resampling through the stored dense output."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if traj.dense is None:
        raise ValueError("trajectory has no dense output to resample from")
    grid = np.linspace(0.0, traj.t_last, int(n_points))
    states = traj.dense(grid)
    h_t = _h_of(traj.kind, traj.params, states)
    g_t = _g_of(traj.kind, traj.params, states)
    return replace(
        traj,
        times=grid,
        states=states,
        max_H_drift=float(np.max(np.abs(h_t - h_t[0]))),
        max_G_drift=float(np.max(np.abs(g_t - g_t[0]))),
    )


def real_eo_energy(params, traj):
    """Energy audit helper for real-EO trajectories (H only, G is absent)."""
    if traj.kind != "real-eo":
        raise ValueError("not a real-EO trajectory")
    return eval_real_EO(params, traj.states[:, 0], traj.states[:, 1])
