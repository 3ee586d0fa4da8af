"""Initial states on (or near) the surface H = E, G = 0.

Two literal template families reproduce the published trajectory figures;
family A satisfies both constraint equations by construction, family B is
printed verbatim and generally does not (its residuals are reported, never
asserted away).  A damped Newton solver provides constraint-exact states for
any fixed/free split of (x, p, y, q).
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .model import Params, State1D, eval_G, eval_H, grad_G, grad_H

__all__ = [
    "RadicandNegative",
    "OutOfDomain",
    "NoConvergence",
    "SingularJacobian",
    "ICResult",
    "ICRequest",
    "ic_family_A",
    "ic_family_B",
    "ic_solve",
    "portrait_momentum",
]

_FIELDS = ("x", "p", "y", "q")
_RADICAND_CLAMP = -1e-12  # boundary cases like 1 + 4b = 0 under rounding


class RadicandNegative(ValueError):
    """The (c, b) pair admits no real state in the requested family."""

    def __init__(self, message, radicand):
        super().__init__(message)
        self.radicand = radicand


class OutOfDomain(ValueError):
    """Requested point lies outside the level set's real domain."""


class NoConvergence(RuntimeError):
    """Newton iteration exhausted its budget; final residuals attached."""

    def __init__(self, message, residuals, iterations):
        super().__init__(message)
        self.residuals = residuals
        self.iterations = iterations


class SingularJacobian(RuntimeError):
    """No descent direction: the constraint Jacobian vanished."""


@dataclass(frozen=True)
class ICResult:
    """Constructed state plus its constraint residuals (H - E, G)."""

    state: State1D
    h_residual: float
    g_residual: float

    @property
    def residual_norm(self):
        return max(abs(self.h_residual), abs(self.g_residual))


@dataclass
class ICRequest:
    """One initial-condition specification as the CLI consumes it."""

    family: str                     # "A", "B" or "Custom"
    params: Params
    c: float = 1.0
    energy_sign: str = "positive"   # |E| = 1/2 throughout
    fixed: dict = field(default_factory=dict)
    free: tuple = ()

    def __post_init__(self):
        if self.family not in ("A", "B", "Custom"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.energy_sign not in ("positive", "negative"):
            raise ValueError("energy_sign must be 'positive' or 'negative'")

    @property
    def energy(self):
        return 0.5 if self.energy_sign == "positive" else -0.5


def _sqrt_or_raise(radicand, what):
    if radicand < 0.0:
        if radicand > _RADICAND_CLAMP:
            return 0.0
        raise RadicandNegative(f"negative radicand {radicand:g} in {what}", radicand)
    return math.sqrt(radicand)


def _energy(energy_sign):
    if energy_sign == "positive":
        return 0.5
    if energy_sign == "negative":
        return -0.5
    raise ValueError("energy_sign must be 'positive' or 'negative'")


def ic_family_A(c, params, energy_sign="positive"):
    """x = c, p = 0, y = 0 and q chosen so that H = E exactly (G = 0 holds
    identically on this slice).

    For a = 1 this is the printed template
    q = sqrt((c^2 -+ 1)/(1 - b c^2)); the general-a form solves the same
    energy shell, q^2 = (a c^2 - 2E)/(1 - b c^2).
    """
    E = _energy(energy_sign)
    den = 1.0 - params.b * c * c
    if den == 0.0:
        raise OutOfDomain(f"family A undefined at 1 - b c^2 = 0 (c={c})")
    q = _sqrt_or_raise((params.a * c * c - 2.0 * E) / den, "family A")
    state = State1D(x=c, p=0.0, y=0.0, q=q)
    return ICResult(state, eval_H(params, state) - E, eval_G(params, state))


def ic_family_B(c, params, energy_sign="positive"):
    """The structurally different literal template: x = 1, p = c, y = 1 and
    q = sqrt(c^2 + (1 + 4b)/(1 + 4b^2))        (positive energy)
    q = sqrt((b - 1)/(c (4 b^2 - 1)))          (negative energy).

    These states do not satisfy H = E, G = 0 for generic (b, c); the
    residual report carries the actual (H - E, G).  Use ic_solve for
    constraint-exact alternatives.
    """
    E = _energy(energy_sign)
    b = params.b
    if energy_sign == "positive":
        q = _sqrt_or_raise(c * c + (1.0 + 4.0 * b) / (1.0 + 4.0 * b * b), "family B+")
    else:
        den = c * (4.0 * b * b - 1.0)
        if den == 0.0:
            raise OutOfDomain("family B- needs c != 0 and 4 b^2 != 1")
        q = _sqrt_or_raise((b - 1.0) / den, "family B-")
    state = State1D(x=1.0, p=c, y=1.0, q=q)
    return ICResult(state, eval_H(params, state) - E, eval_G(params, state))


def _default_guess(params, energy_sign, fixed, free):
    # family-A values where constructible, else unit seeds
    try:
        seed = ic_family_A(fixed.get("x", 1.5), params, energy_sign).state
    except (RadicandNegative, OutOfDomain):
        seed = State1D(x=fixed.get("x", 1.0), p=0.0, y=0.0, q=1.0)
    return {name: getattr(seed, name) for name in free}


def ic_solve(params, fixed, free, energy_sign="positive", guess=None,
             tol=1e-12, max_iter=100):
    """Damped Newton iteration on (H - E, G) = 0 over the free components.

    fixed maps component names to values; free names the remaining one or
    two components being solved for.  Rank-deficient Jacobians (e.g. when G
    vanishes identically on the slice) are handled by a least-squares step.
    Returns (ICResult, iterations).
    """
    free = tuple(free)
    if not set(fixed) <= set(_FIELDS) or not set(free) <= set(_FIELDS):
        raise ValueError(f"component names must be among {_FIELDS}")
    if set(fixed) & set(free):
        raise ValueError("a component cannot be both fixed and free")
    if len(free) not in (1, 2):
        raise ValueError("designate one or two free components")
    if set(fixed) | set(free) != set(_FIELDS):
        raise ValueError("fixed and free together must cover x, p, y, q")

    E = _energy(energy_sign)
    vals = dict(fixed)
    vals.update(guess if guess is not None else
                _default_guess(params, energy_sign, fixed, free))
    state = State1D(**vals)
    idx = [_FIELDS.index(name) for name in free]

    def residuals(s):
        return np.array([eval_H(params, s) - E, eval_G(params, s)])

    res = residuals(state)
    for iteration in range(max_iter):
        if np.max(np.abs(res)) < tol:
            return (ICResult(state, float(res[0]), float(res[1])), iteration)
        jac = np.vstack([grad_H(params, state), grad_G(params, state)])[:, idx]
        if np.max(np.abs(jac)) == 0.0:
            raise SingularJacobian("constraint Jacobian vanished at the iterate")
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        if not np.all(np.isfinite(step)) or np.max(np.abs(step)) == 0.0:
            raise SingularJacobian("no usable Newton direction")
        # backtracking damping
        lam = 1.0
        best = None
        for _halving in range(40):
            arr = state.as_array()
            arr[idx] += lam * step
            cand = State1D.from_array(arr)
            cand_res = residuals(cand)
            if np.linalg.norm(cand_res) < np.linalg.norm(res):
                best = (cand, cand_res)
                break
            lam *= 0.5
        if best is None:
            raise NoConvergence("damping failed to reduce the residual",
                                residuals=res, iterations=iteration)
        state, res = best
    if np.max(np.abs(res)) < tol:
        return (ICResult(state, float(res[0]), float(res[1])), max_iter)
    raise NoConvergence(f"no convergence after {max_iter} iterations",
                        residuals=res, iterations=max_iter)


def portrait_momentum(params, x, E):
    """Nonnegative momentum branch of the real-EO level set H = E:
    p = sqrt((2E - a x^2)/(1 - b x^2)).  Raises OutOfDomain off the set."""
    den = 1.0 - params.b * x * x
    if den == 0.0:
        raise OutOfDomain(f"level set parametrization breaks at x={x} (1 - b x^2 = 0)")
    val = (2.0 * E - params.a * x * x) / den
    if val < 0.0:
        raise OutOfDomain(f"no real momentum at x={x} for E={E}")
    return math.sqrt(val)
