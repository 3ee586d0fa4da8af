"""Numeric Poisson brackets on the canonical phase space
{x_i, p_j} = delta_ij, {y_i, q_j} = delta_ij.

Observables carry an evaluator and, optionally, a hand-coded gradient;
without one, brackets fall back to Richardson-extrapolated central
differences.  verify_algebra tabulates the constraint-algebra quantities
({G,H}, {L_i,H}, the so(3) relations) over seeded random states.
"""

from dataclasses import dataclass, field
import numpy as np

from .model import (
    StateND,
    angular_momentum,
    eval_G_nd,
    eval_H_nd,
    eval_rhs_nd,
    grad_G_nd,
    grad_H_nd,
)

__all__ = [
    "Observable",
    "poisson_bracket",
    "hamiltonian_observable",
    "constraint_observable",
    "angular_momentum_observable",
    "AlgebraReport",
    "verify_algebra",
]

_FD_STEP = 1e-4


@dataclass(frozen=True)
class Observable:
    """Named phase-space function with an optional analytic gradient.

    The gradient is flat 4n in (x, p, y, q) block order, matching
    StateND.as_array().
    """

    name: str
    evaluator: object
    analytic_gradient: object = None

    def gradient(self, s, step=_FD_STEP):
        if self.analytic_gradient is not None:
            return np.asarray(self.analytic_gradient(s), dtype=float)
        return _richardson_gradient(self.evaluator, s, step)


def _central_gradient(fn, flat, step):
    g = np.empty(flat.size)
    for i in range(flat.size):
        hi = flat.copy()
        lo = flat.copy()
        hi[i] += step
        lo[i] -= step
        g[i] = (fn(StateND.from_array(hi)) - fn(StateND.from_array(lo))) / (2.0 * step)
    return g


def _richardson_gradient(fn, s, step):
    flat = s.as_array()
    coarse = _central_gradient(fn, flat, step)
    fine = _central_gradient(fn, flat, 0.5 * step)
    return (4.0 * fine - coarse) / 3.0


def poisson_bracket(f, g, s, step=_FD_STEP):
    """{f, g} at state s: sum_i df/dx_i dg/dp_i - df/dp_i dg/dx_i
    + df/dy_i dg/dq_i - df/dq_i dg/dy_i."""
    n = s.dim
    gf = f.gradient(s, step)
    gg = g.gradient(s, step)
    fx, fp, fy, fq = gf[:n], gf[n:2 * n], gf[2 * n:3 * n], gf[3 * n:]
    gx, gp, gy, gq = gg[:n], gg[n:2 * n], gg[2 * n:3 * n], gg[3 * n:]
    return float(fx @ gp - fp @ gx + fy @ gq - fq @ gy)


def hamiltonian_observable(params, analytic=True):
    return Observable(
        "H",
        lambda s: eval_H_nd(params, s),
        (lambda s: grad_H_nd(params, s)) if analytic else None,
    )


def constraint_observable(params, analytic=True):
    return Observable(
        "G",
        lambda s: eval_G_nd(params, s),
        (lambda s: grad_G_nd(params, s)) if analytic else None,
    )


def _basis(i):
    e = np.zeros(3)
    e[i] = 1.0
    return e


def angular_momentum_observable(i, analytic=True):
    """L_i = eps_ijk x_j p_k of the real pair (dim 3)."""
    e = _basis(i)

    def evaluator(s):
        return float(angular_momentum(s)[i])

    def gradient(s):
        return np.concatenate([np.cross(s.p, e), np.cross(e, s.x),
                               np.zeros(3), np.zeros(3)])

    return Observable(f"L{i + 1}", evaluator, gradient if analytic else None)


@dataclass
class AlgebraReport:
    """Max |bracket| per algebra row over the sampled states."""

    rows: dict
    n_trials: int
    seed: int
    dim: int
    params: object
    method: str
    tolerance: float
    states_scale: float = 1.0
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return all(v < self.tolerance for v in self.rows.values())

    def to_text(self):
        width = max(len(k) for k in self.rows)
        lines = [
            f"constraint-algebra check: dim={self.dim} a={self.params.a:g} "
            f"b={self.params.b:g} trials={self.n_trials} seed={self.seed} "
            f"method={self.method} tolerance={self.tolerance:g}",
        ]
        for name, value in self.rows.items():
            verdict = "ok" if value < self.tolerance else "FAIL"
            lines.append(f"  {name:<{width}}  max|.| = {value:.3e}  {verdict}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _random_state(rng, dim, scale):
    return StateND(*(rng.uniform(-scale, scale, dim) for _ in range(4)))


def verify_algebra(params, n_trials, seed=20260809, dim=3, analytic=True,
                   tolerance=None, states_scale=1.0, hamiltonian=None):
    """Tabulate max |{G,H}|, |{L_i,H}| and |{L_i,L_j} - eps_ijk L_k| over
    n_trials seeded random states uniform in [-scale, scale]^{4 dim}.

    dim=1 reports the {G,H} row only.  `hamiltonian` replaces the H
    observable (test-only hook for negative controls).
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    if tolerance is None:
        tolerance = 1e-10 if analytic else 1e-7
    rng = np.random.default_rng(seed)
    obs_h = hamiltonian if hamiltonian is not None else hamiltonian_observable(params, analytic)
    obs_g = constraint_observable(params, analytic)
    rows = {"{G,H}": 0.0}
    if dim == 3:
        obs_l = [angular_momentum_observable(i, analytic) for i in range(3)]
        for i in range(3):
            rows[f"{{L{i + 1},H}}"] = 0.0
        for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
            rows[f"{{L{i + 1},L{j + 1}}}-L{k + 1}"] = 0.0

    for _ in range(n_trials):
        s = _random_state(rng, dim, states_scale)
        rows["{G,H}"] = max(rows["{G,H}"], abs(poisson_bracket(obs_g, obs_h, s)))
        if dim == 3:
            lvals = angular_momentum(s)
            for i in range(3):
                rows[f"{{L{i + 1},H}}"] = max(
                    rows[f"{{L{i + 1},H}}"],
                    abs(poisson_bracket(obs_l[i], obs_h, s)))
            for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
                dev = poisson_bracket(obs_l[i], obs_l[j], s) - lvals[k]
                rows[f"{{L{i + 1},L{j + 1}}}-L{k + 1}"] = max(
                    rows[f"{{L{i + 1},L{j + 1}}}-L{k + 1}"], abs(dev))

    return AlgebraReport(
        rows=rows,
        n_trials=n_trials,
        seed=seed,
        dim=dim,
        params=params,
        method="analytic" if analytic else "central-diff+richardson",
        tolerance=tolerance,
        states_scale=states_scale,
    )


def flow_derivative(params, obs, s):
    """d obs/dt along the H-flow, i.e. {obs, H}(s) via the flow field."""
    grad = obs.gradient(s)
    return float(grad @ eval_rhs_nd(params, s))
