"""Hamiltonians, constraints and equations of motion of the complex exotic
oscillator (CEO): a harmonic oscillator with position-dependent mass,
analytically continued to complex position and momentum.

Real canonical coordinates are (x, p, y, q) per degree of freedom, with
z = x + i*y and pi = p - i*q.  The complex energy splits as
Hcal = H + i*G; H generates the time evolution and G is the first-class
constraint whose vanishing keeps the energy real.  Both are conserved.

All evaluators are pure total functions of finite inputs; loci such as
1 - b*x**2 = 0 are not singular for the flow (it is polynomial).
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "Params",
    "State1D",
    "StateND",
    "EnergyPair",
    "eval_complex_oracle",
    "eval_complex_oracle_nd",
    "eval_H",
    "eval_G",
    "eval_rhs",
    "eval_real_EO",
    "eval_real_EO_rhs",
    "eval_H_nd",
    "eval_G_nd",
    "eval_rhs_nd",
    "grad_H",
    "grad_G",
    "grad_H_nd",
    "grad_G_nd",
    "dH_dt",
    "dG_dt",
    "angular_momentum",
    "second_deriv_x",
    "second_deriv_x_nd",
    "pt_reflect",
    "time_reverse_momenta",
]


def _require_finite(name, value):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class Params:
    """Physical parameters: harmonic stiffness a, exotic strength b (any sign)."""

    a: float = 1.0
    b: float = 0.0

    def __post_init__(self):
        _require_finite("a", self.a)
        _require_finite("b", self.b)


@dataclass(frozen=True)
class State1D:
    """One complexified degree of freedom: z = x + i*y, pi = p - i*q."""

    x: float
    p: float
    y: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        _require_finite("state", (self.x, self.p, self.y, self.q))

    def as_array(self):
        return np.array([self.x, self.p, self.y, self.q], dtype=float)

    @classmethod
    def from_array(cls, arr):
        x, p, y, q = (float(v) for v in arr)
        return cls(x, p, y, q)


@dataclass(frozen=True)
class StateND:
    """n complexified degrees of freedom; x, p, y, q are length-n vectors."""

    x: np.ndarray
    p: np.ndarray
    y: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        for name in ("x", "p", "y", "q"):
            vec = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, vec)
            _require_finite(name, vec)
        n = self.x.shape
        if not (self.p.shape == n and self.y.shape == n and self.q.shape == n):
            raise ValueError("x, p, y, q must all have the same length")
        if self.x.ndim != 1 or self.x.size < 1:
            raise ValueError("state vectors must be 1-d and non-empty")

    @property
    def dim(self):
        return self.x.size

    def as_array(self):
        return np.concatenate([self.x, self.p, self.y, self.q])

    @classmethod
    def from_array(cls, arr):
        arr = np.asarray(arr, dtype=float)
        n = arr.size // 4
        if arr.size != 4 * n:
            raise ValueError("flat state length must be a multiple of 4")
        return cls(arr[:n], arr[n:2 * n], arr[2 * n:3 * n], arr[3 * n:])


class EnergyPair(tuple):
    """(H, G) = (Re Hcal, Im Hcal)."""

    __slots__ = ()

    def __new__(cls, H, G):
        return tuple.__new__(cls, (float(H), float(G)))

    @property
    def H(self):
        return self[0]

    @property
    def G(self):
        return self[1]


# ---------------------------------------------------------------------------
# complex-arithmetic oracles (independent of the split real formulas)

def eval_complex_oracle(params, s):
    """Hcal = pi^2 (1 - b z^2)/2 + a z^2 / 2 by literal complex arithmetic."""
    z = complex(s.x, s.y)
    pi = complex(s.p, -s.q)
    hcal = 0.5 * pi * pi * (1.0 - params.b * z * z) + 0.5 * params.a * z * z
    return EnergyPair(hcal.real, hcal.imag)


def eval_complex_oracle_nd(params, s):
    """n-dimensional Hcal = (pi.pi - b (z.pi)^2 + a z.z)/2, complex vectors."""
    z = s.x + 1j * s.y
    pi = s.p - 1j * s.q
    zpi = np.dot(z, pi)
    hcal = 0.5 * (np.dot(pi, pi) - params.b * zpi * zpi + params.a * np.dot(z, z))
    return EnergyPair(hcal.real, hcal.imag)


# ---------------------------------------------------------------------------
# 1D split evaluators and flow

def eval_H(params, s):
    """Real part of Hcal for one degree of freedom."""
    a, b = params.a, params.b
    x, p, y, q = s.x, s.p, s.y, s.q
    r2 = x * x - y * y
    return 0.5 * (a * r2 + (p * p - q * q) * (1.0 - b * r2) - 4.0 * b * x * y * p * q)


def eval_G(params, s):
    """Imaginary part of Hcal; the first-class constraint."""
    a, b = params.a, params.b
    x, p, y, q = s.x, s.p, s.y, s.q
    return x * y * (a - b * (p * p - q * q)) - p * q * (1.0 - b * (x * x - y * y))


def _rhs1(a, b, x, p, y, q):
    r2 = x * x - y * y
    pq2 = p * p - q * q
    xd = p * (1.0 - b * r2) - 2.0 * b * x * y * q
    pd = b * x * pq2 + 2.0 * b * y * p * q - a * x
    yd = -q * (1.0 - b * r2) - 2.0 * b * x * y * p
    qd = -b * y * pq2 + 2.0 * b * x * p * q + a * y
    return xd, pd, yd, qd


def eval_rhs(params, s):
    """(xdot, pdot, ydot, qdot): canonical flow of H, with
    xdot = dH/dp, pdot = -dH/dx, ydot = dH/dq, qdot = -dH/dy."""
    return np.array(_rhs1(params.a, params.b, s.x, s.p, s.y, s.q))


def grad_H(params, s):
    """(dH/dx, dH/dp, dH/dy, dH/dq) as a 4-vector."""
    xd, pd, yd, qd = _rhs1(params.a, params.b, s.x, s.p, s.y, s.q)
    return np.array([-pd, xd, -qd, yd])


def grad_G(params, s):
    """(dG/dx, dG/dp, dG/dy, dG/dq) as a 4-vector."""
    a, b = params.a, params.b
    x, p, y, q = s.x, s.p, s.y, s.q
    pq2 = p * p - q * q
    r2 = x * x - y * y
    gx = y * (a - b * pq2) + 2.0 * b * x * p * q
    gp = -2.0 * b * x * y * p - q * (1.0 - b * r2)
    gy = x * (a - b * pq2) - 2.0 * b * y * p * q
    gq = 2.0 * b * x * y * q - p * (1.0 - b * r2)
    return np.array([gx, gp, gy, gq])


# ---------------------------------------------------------------------------
# real exotic oscillator (the pre-complexification model)

def eval_real_EO(params, x, p):
    """H = p^2 (1 - b x^2)/2 + a x^2 / 2 on the real phase plane."""
    return 0.5 * p * p * (1.0 - params.b * x * x) + 0.5 * params.a * x * x


def eval_real_EO_rhs(params, x, p):
    """(xdot, pdot) = (p (1 - b x^2), b x p^2 - a x); polynomial everywhere."""
    a, b = params.a, params.b
    return np.array([p * (1.0 - b * x * x), b * x * p * p - a * x])


def second_deriv_x(params, x, p):
    """xddot along real-EO solutions, equal to -2 [bH - a(b x^2 - 1/2)] x."""
    h = eval_real_EO(params, x, p)
    return -2.0 * (params.b * h - params.a * (params.b * x * x - 0.5)) * x


# ---------------------------------------------------------------------------
# n-dimensional evaluators; n = 1 delegates to the 1D formulas so that
# dimensional reduction is bit-for-bit

def _uv(s):
    u = np.dot(s.x, s.p) + np.dot(s.y, s.q)
    v = np.dot(s.y, s.p) - np.dot(s.x, s.q)
    return u, v


def _as_1d(s):
    return State1D(float(s.x[0]), float(s.p[0]), float(s.y[0]), float(s.q[0]))


def eval_H_nd(params, s):
    """Re Hcal for n degrees of freedom:
    H = [(p.p - q.q) + a(x.x - y.y) - b((xp)^2 + (yq)^2 - (xq)^2 - (yp)^2
         + 2(xp)(yq) + 2(xq)(yp))]/2, with (uv) the Euclidean inner product.
    """
    if s.dim == 1:
        return eval_H(params, _as_1d(s))
    xp = np.dot(s.x, s.p)
    yq = np.dot(s.y, s.q)
    xq = np.dot(s.x, s.q)
    yp = np.dot(s.y, s.p)
    quart = xp * xp + yq * yq - xq * xq - yp * yp + 2.0 * xp * yq + 2.0 * xq * yp
    return 0.5 * (np.dot(s.p, s.p) - np.dot(s.q, s.q)
                  + params.a * (np.dot(s.x, s.x) - np.dot(s.y, s.y))
                  - params.b * quart)


def eval_G_nd(params, s):
    """Im Hcal for n degrees of freedom:
    G = -(pq) + a(xy) - b[(xp)(yp) - (xp)(xq) + (yp)(yq) - (xq)(yq)]."""
    if s.dim == 1:
        return eval_G(params, _as_1d(s))
    xp = np.dot(s.x, s.p)
    yq = np.dot(s.y, s.q)
    xq = np.dot(s.x, s.q)
    yp = np.dot(s.y, s.p)
    return (-np.dot(s.p, s.q) + params.a * np.dot(s.x, s.y)
            - params.b * (xp * yp - xp * xq + yp * yq - xq * yq))


def eval_rhs_nd(params, s):
    """Flat 4n-vector (xdot, pdot, ydot, qdot), same sign convention as 1D."""
    if s.dim == 1:
        return eval_rhs(params, _as_1d(s))
    a, b = params.a, params.b
    u, v = _uv(s)
    xd = s.p - b * (u * s.x - v * s.y)
    pd = -a * s.x + b * (u * s.p + v * s.q)
    yd = -s.q - b * (u * s.y + v * s.x)
    qd = a * s.y + b * (u * s.q - v * s.p)
    return np.concatenate([xd, pd, yd, qd])


def grad_H_nd(params, s):
    """Flat 4n gradient of eval_H_nd in (x, p, y, q) block order."""
    if s.dim == 1:
        return grad_H(params, _as_1d(s))
    flow = eval_rhs_nd(params, s)
    n = s.dim
    xd, pd, yd, qd = flow[:n], flow[n:2 * n], flow[2 * n:3 * n], flow[3 * n:]
    return np.concatenate([-pd, xd, -qd, yd])


def grad_G_nd(params, s):
    """Flat 4n gradient of eval_G_nd in (x, p, y, q) block order."""
    if s.dim == 1:
        return grad_G(params, _as_1d(s))
    a, b = params.a, params.b
    u, v = _uv(s)
    gx = a * s.y - b * (v * s.p - u * s.q)
    gp = -s.q - b * (v * s.x + u * s.y)
    gy = a * s.x - b * (v * s.q + u * s.p)
    gq = -s.p - b * (v * s.y - u * s.x)
    return np.concatenate([gx, gp, gy, gq])


def dH_dt(params, s):
    """Analytic time derivative of H along the flow (identically zero)."""
    if isinstance(s, State1D):
        return float(np.dot(grad_H(params, s), eval_rhs(params, s)))
    return float(np.dot(grad_H_nd(params, s), eval_rhs_nd(params, s)))


def dG_dt(params, s):
    """Analytic time derivative of G along the flow (identically zero: {G,H}=0)."""
    if isinstance(s, State1D):
        return float(np.dot(grad_G(params, s), eval_rhs(params, s)))
    return float(np.dot(grad_G_nd(params, s), eval_rhs_nd(params, s)))


def angular_momentum(s):
    """L_i = eps_ijk x_j p_k of the real position/momentum pair; dim 3 only."""
    if s.dim != 3:
        raise ValueError(f"angular momentum needs dim=3, got dim={s.dim}")
    return np.cross(s.x, s.p)


def second_deriv_x_nd(params, s):
    """xddot_i = -[a + 2bH - 2ab x.x + 2ab y.y] x_i + 2b [G - 2a (xy)] y_i."""
    a, b = params.a, params.b
    h = eval_H_nd(params, s)
    g = eval_G_nd(params, s)
    x2 = np.dot(s.x, s.x)
    y2 = np.dot(s.y, s.y)
    xy = np.dot(s.x, s.y)
    return (-(a + 2.0 * b * h - 2.0 * a * b * x2 + 2.0 * a * b * y2) * s.x
            + 2.0 * b * (g - 2.0 * a * xy) * s.y)


# ---------------------------------------------------------------------------
# discrete symmetries of the flow

def pt_reflect(s):
    """PT companion map (x, p, y, q) -> (-x, p, y, -q); combined with t -> -t
    it sends solutions to solutions."""
    return State1D(-s.x, s.p, s.y, -s.q)


def time_reverse_momenta(s):
    """Momentum flip (p, q) -> (-p, -q); combined with t -> -t it reverses
    any solution onto itself."""
    if isinstance(s, State1D):
        return State1D(s.x, -s.p, s.y, -s.q)
    return StateND(s.x, -s.p, s.y, -s.q)
