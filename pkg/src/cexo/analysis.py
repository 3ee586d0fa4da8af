"""Trajectory classification and parameter scans.

Closure is judged on the full phase-space state: the smallest time T past
the first distance maximum where ||s(T) - s(0)|| dips below a relative
tolerance, with the dip located by minimizing over the dense output.
PT symmetry is judged on the (x, y) projection, following the plotting
convention for complexified trajectories: a symmetric orbit coincides with
its reflection about the ordinate.  Scans in b bracket every
classification flip by bisection, which is how candidate classical
exceptional points are located.
"""

from dataclasses import dataclass, field
from concurrent.futures import ThreadPoolExecutor

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import ConvexHull, QhullError

from .model import Params
from .integrator import IntegratorConfig, Trajectory, integrate, resample
from . import initcond

__all__ = [
    "InsufficientSpan",
    "DegenerateOrbit",
    "Classification",
    "Transition",
    "ScanResult",
    "detect_closure",
    "classify_pt",
    "classify_trajectory",
    "ep_scan",
    "rotate_quarter",
    "curve_mismatch",
]


class InsufficientSpan(RuntimeError):
    """Trajectory too short to expose the candidate returns."""


class DegenerateOrbit(RuntimeError):
    """Orbit extent below resolution (a fixed point)."""


@dataclass
class Classification:
    """Closure / PT verdict for one trajectory with its residual evidence."""

    closed: bool
    period: float | None
    pt_symmetric: bool
    closure_residual: float
    symmetry_residual: float
    flags: set = field(default_factory=set)
    return_residuals: tuple = ()

    def summary(self):
        period = f"{self.period:.6g}" if self.period is not None else "-"
        flags = ",".join(sorted(self.flags)) or "-"
        return (f"closed={str(self.closed).lower()} period={period} "
                f"pt={str(self.pt_symmetric).lower()} "
                f"closure_residual={self.closure_residual:.3e} "
                f"pt_residual={self.symmetry_residual:.3e} flags={flags}")


@dataclass(frozen=True)
class Transition:
    """Bisected bracket around one classification flip."""

    quantity: str      # "pt_symmetric" or "closed"
    lo: float
    hi: float
    lo_value: bool
    hi_value: bool


@dataclass
class ScanResult:
    parameter: str
    values: np.ndarray
    classifications: list
    transitions: list
    errors: dict


# ---------------------------------------------------------------------------
# closure

def _distance_series(traj, n_grid):
    grid = np.linspace(0.0, traj.t_last, n_grid)
    states = traj.dense(grid)
    s0 = states[0]
    return grid, states, np.linalg.norm(states - s0, axis=1)


def detect_closure(traj, tol=1e-6, n_grid=8192, return_details=False):
    """(closed, period, residual): search for the smallest return time.

    The search discards the neighborhood of t = 0 (the first local maximum
    of the distance must come first), locates every later local minimum of
    ||s(t) - s(0)|| on a dense grid, and refines each with a bounded scalar
    minimization over the dense output.  Residuals are normalized by
    1 + orbit radius.  Raises InsufficientSpan when fewer than three
    candidate returns fit in the trajectory and none closes.

    With return_details the sequence of refined per-return residuals is
    appended (feeds spiral detection).
    """
    if traj.dense is None:
        raise ValueError("trajectory has no dense output")
    grid, _, d = _distance_series(traj, n_grid)
    radius = float(np.max(d))
    scale = 1.0 + radius

    # first local maximum bounds the trivial-return exclusion zone
    rising = np.nonzero((d[1:-1] >= d[:-2]) & (d[1:-1] > d[2:]))[0]
    if rising.size == 0:
        raise InsufficientSpan("distance to the start never peaks; extend t_end")
    first_max = rising[0] + 1

    interior = np.nonzero(
        (d[1:-1] <= d[:-2]) & (d[1:-1] <= d[2:]))[0] + 1
    candidates = [i for i in interior if i > first_max]

    s0 = traj.dense(0.0)

    def dist(t):
        return float(np.linalg.norm(traj.dense(t) - s0))

    refined = []
    for i in candidates:
        res = minimize_scalar(
            dist, bounds=(grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]),
            method="bounded", options={"xatol": 1e-12})
        refined.append((float(res.x), float(res.fun) / scale))

    period = None
    closed = False
    for t_star, r in refined:
        if r < tol:
            closed = True
            period = t_star
            break

    if not refined:
        raise InsufficientSpan("no candidate returns past the first maximum")
    if not closed and len(refined) < 3:
        raise InsufficientSpan(
            f"only {len(refined)} candidate returns; extend t_end")

    residual = min(r for _, r in refined)
    if return_details:
        return closed, period, residual, tuple(r for _, r in refined)
    return closed, period, residual


# ---------------------------------------------------------------------------
# PT symmetry on the (x, y) projection

def _segments_distance(points, polyline, block=512):
    """Distance from each point to the nearest segment of the polyline."""
    a = polyline[:-1]
    ab = polyline[1:] - a
    ab2 = np.einsum("ij,ij->i", ab, ab)
    ab2 = np.where(ab2 == 0.0, 1.0, ab2)
    out = np.empty(len(points))
    for lo in range(0, len(points), block):
        chunk = points[lo:lo + block]
        ap = chunk[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("pij,ij->pi", ap, ab) / ab2, 0.0, 1.0)
        diff = ap - t[:, :, None] * ab[None, :, :]
        out[lo:lo + block] = np.sqrt(np.einsum("pij,pij->pi", diff, diff).min(axis=1))
    return out


def curve_mismatch(curve_a, curve_b):
    """Symmetric sup distance between two sampled curves (absolute units)."""
    return max(
        float(np.max(_segments_distance(curve_a, curve_b))),
        float(np.max(_segments_distance(curve_b, curve_a))),
    )


def _diameter(points):
    try:
        hull = ConvexHull(points)
        verts = points[hull.vertices]
    except (QhullError, ValueError):
        stride = max(1, len(points) // 512)
        verts = points[::stride]
    diff = verts[:, None, :] - verts[None, :, :]
    return float(np.sqrt(np.einsum("ijk,ijk->ij", diff, diff).max()))


def classify_pt(traj, tol=0.02, n_samples=2048):
    """(pt_symmetric, residual): mismatch between the (x, y) projection and
    its mirror image (-x, y), sup-normed and scaled by the orbit diameter."""
    n_samples = max(int(n_samples), 512)
    pts = resample(traj, n_samples).xy()
    diameter = _diameter(pts)
    if diameter < 1e-10:
        raise DegenerateOrbit("orbit diameter below 1e-10: fixed point")
    mirrored = pts * np.array([-1.0, 1.0])
    residual = curve_mismatch(pts, mirrored) / diameter
    return residual < tol, residual


# ---------------------------------------------------------------------------
# combined verdict

def _spiral(return_residuals, min_run=3, drift_ratio=2.0):
    """Monotone drift of the successive return residuals marks a spiral:
    some maximal monotone run of at least min_run returns whose residual
    drifts by more than drift_ratio."""
    r = np.asarray(return_residuals)
    if r.size < min_run:
        return False
    i = 0
    while i < r.size - 1:
        j = i + 1
        sign = np.sign(r[j] - r[i])
        while j + 1 < r.size and np.sign(r[j + 1] - r[j]) == sign and sign != 0:
            j += 1
        if sign != 0 and (j - i + 1) >= min_run:
            lo, hi = min(r[i], r[j]), max(r[i], r[j])
            if lo > 0 and hi / lo > drift_ratio:
                return True
        i = j
    return False


def classify_trajectory(traj, closure_tol=1e-6, pt_tol=0.02, n_samples=2048):
    """Full Classification: closure, PT symmetry, and the escape / fixed
    point / spiral flags.  Escaped (nonfinite) runs are open, never
    PT-symmetric by default."""
    flags = set()
    if traj.status == "nonfinite":
        flags.add("escaped")
        return Classification(
            closed=False, period=None, pt_symmetric=False,
            closure_residual=float("inf"), symmetry_residual=float("inf"),
            flags=flags)

    try:
        pt, sym_residual = classify_pt(traj, tol=pt_tol, n_samples=n_samples)
    except DegenerateOrbit:
        flags.add("fixed_point")
        return Classification(
            closed=False, period=None, pt_symmetric=False,
            closure_residual=0.0, symmetry_residual=float("nan"),
            flags=flags)

    closed, period, closure_residual, returns = detect_closure(
        traj, tol=closure_tol, return_details=True)
    if not closed and _spiral(returns):
        flags.add("spiral")
        pt = False

    return Classification(
        closed=closed, period=period, pt_symmetric=pt,
        closure_residual=closure_residual, symmetry_residual=sym_residual,
        flags=flags, return_residuals=returns)


# ---------------------------------------------------------------------------
# parameter scan

_FAMILIES = {"A": initcond.ic_family_A, "B": initcond.ic_family_B}


def _classify_at(b, c, family, energy_sign, a, cfg, closure_tol, pt_tol, n_samples):
    params = Params(a=a, b=b)
    state = _FAMILIES[family](c, params, energy_sign).state
    traj = integrate(params, state, cfg)
    return classify_trajectory(traj, closure_tol=closure_tol, pt_tol=pt_tol,
                               n_samples=n_samples)


def ep_scan(c, b_min, b_max, n_samples, family="B", energy_sign="positive",
            a=1.0, cfg=None, closure_tol=1e-6, pt_tol=0.02,
            bracket_width=1e-4, classify_samples=2048, max_workers=1):
    """Classify the orbit at n_samples values of b and bisect every
    classification flip (pt_symmetric and closed) down to bracket_width.

    Per-sample failures are recorded in ScanResult.errors without aborting
    the scan; flips are only bracketed between successfully classified
    neighbors.
    """
    if n_samples < 3:
        raise ValueError("n_samples must be at least 3")
    if not b_max > b_min:
        raise ValueError("need b_max > b_min")
    if cfg is None:
        cfg = IntegratorConfig(t_end=100.0, sample_interval=0.05)

    values = np.linspace(b_min, b_max, int(n_samples))

    def job(b):
        return _classify_at(b, c, family, energy_sign, a, cfg,
                            closure_tol, pt_tol, classify_samples)

    classifications = [None] * len(values)
    errors = {}
    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            futures = {i: pool.submit(job, b) for i, b in enumerate(values)}
        for i, fut in futures.items():
            try:
                classifications[i] = fut.result()
            except Exception as exc:  # per-sample failure, recorded
                errors[i] = f"{type(exc).__name__}: {exc}"
    else:
        for i, b in enumerate(values):
            try:
                classifications[i] = job(b)
            except Exception as exc:
                errors[i] = f"{type(exc).__name__}: {exc}"

    transitions = []
    for i in range(len(values) - 1):
        left, right = classifications[i], classifications[i + 1]
        if left is None or right is None:
            continue
        for quantity in ("pt_symmetric", "closed"):
            lo_val = getattr(left, quantity)
            hi_val = getattr(right, quantity)
            if lo_val == hi_val:
                continue
            lo, hi = float(values[i]), float(values[i + 1])
            lo_state, hi_state = lo_val, hi_val
            while hi - lo > bracket_width:
                mid = 0.5 * (lo + hi)
                try:
                    mid_cls = job(mid)
                except Exception:
                    break
                if getattr(mid_cls, quantity) == lo_state:
                    lo = mid
                else:
                    hi = mid
            transitions.append(Transition(quantity, lo, hi, lo_state, hi_state))

    return ScanResult(parameter="b", values=values,
                      classifications=classifications,
                      transitions=transitions, errors=errors)


# ---------------------------------------------------------------------------
# quarter rotation (negative-energy comparison)

_ROTATE_1D = np.array([
    [0.0, 0.0, -1.0, 0.0],
    [0.0, 1.0, 0.0, 0.0],
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
])


def rotate_quarter(traj):
    """Apply (x, y) -> (-y, x) to the projection, momenta carried along
    unchanged.  The result is flagged projection-only: its H/G audit refers
    to the original dynamics, not to a solution of the flow."""
    if traj.kind != "ceo1d":
        raise ValueError("quarter rotation applies to 1D complexified trajectories")
    states = traj.states @ _ROTATE_1D.T
    dense = traj.dense.transformed(_ROTATE_1D) if traj.dense is not None else None
    return Trajectory(
        times=traj.times.copy(),
        states=states,
        H0=traj.H0,
        G0=traj.G0,
        max_H_drift=traj.max_H_drift,
        max_G_drift=traj.max_G_drift,
        status=traj.status,
        t_last=traj.t_last,
        kind=traj.kind,
        params=traj.params,
        dense=dense,
        projection_only=True,
    )
