"""Weighted least-squares fits of the RB decay models.

zeroth: ``y = A p^m + B``
first:  ``y = A p^m + B + D (m-1) p^(m-2)``

In the first-order model ``D`` stands for ``C1 (q - p^2)``. The decay curve
only constrains the product, so ``C1`` and ``q`` are never reported
separately. The m-dependence that time-dependent noise gives ``A1`` and
``B1`` is ignored; fitting time-dependent data issues a warning.

Weights are the per-m record counts ``K_m``. Choose m log-spaced up to a few
multiples of ``1/r`` so that both the decay and the asymptote are sampled.
"""

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .engine import RbDataset, _corr_term
from .errors import ContractError

TOL = 1e-10
MAX_ITER = 500
FLAT_VAR = 1e-10
FLAT_TOL = 1e-9
BOUNDARY_TOL = 1e-6  # p this close to 0 or 1 counts as a boundary solution


@dataclass
class FitResult:
    model: str
    d: int
    p: float = float("nan")
    A: float = float("nan")
    B: float = float("nan")
    D: float = None
    stderr: dict = field(default_factory=dict)
    residual_sum: float = float("nan")
    converged: bool = False
    boundary_hit: bool = False
    flat_curve: bool = False
    iterations: int = 0

    @property
    def r(self):
        return (self.d - 1) * (1 - self.p) / self.d

    @property
    def params(self):
        out = {"p": self.p, "A": self.A, "B": self.B}
        if self.model == "first":
            out["D"] = self.D
        return out

    def predict(self, m):
        theta = [self.p, self.A, self.B] + ([self.D] if self.model == "first" else [])
        return _model(self.model, theta, np.asarray(m, dtype=float))

    def to_dict(self, m_grid=None):
        out = {"model": self.model, "params": self.params, "stderr": self.stderr,
               "r": self.r, "residual_sum": self.residual_sum,
               "flags": {"converged": self.converged, "boundary_hit": self.boundary_hit,
                         "flat_curve": self.flat_curve},
               "iterations": self.iterations}
        if m_grid is not None and not self.flat_curve:
            m_grid = np.asarray(m_grid, dtype=float)
            out["curve"] = {"m": m_grid.tolist(), "fidelity": self.predict(m_grid).tolist()}
        return out


def _model(kind, theta, m):
    p, a, b = theta[:3]
    y = a * np.power(p, m) + b
    if kind == "first":
        y = y + theta[3] * _corr_term(m, p)
    return y


def _jacobian(kind, theta, m):
    p, a = theta[0], theta[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        dp = np.where(m == 0, 0.0, a * m * np.power(p, m - 1))
    cols = [dp, np.power(p, m), np.ones_like(m)]
    if kind == "first":
        with np.errstate(divide="ignore", invalid="ignore"):
            extra = (m - 1) * (m - 2) * np.power(p, m - 3)
        cols[0] = cols[0] + theta[3] * np.where((m == 1) | (m == 2), 0.0, extra)
        cols.append(_corr_term(m, p))
    return np.stack(cols, axis=1)


def _prepare(data, min_points):
    ms, ybar, counts = data.averages()
    if len(ms) < min_points:
        raise ContractError(f"need at least {min_points} distinct m values")
    if data.meta.get("mode") == "time_dependent":
        warnings.warn("time-dependent data: A1 and B1 are treated as constants", stacklevel=3)
    return ms.astype(float), ybar, counts.astype(float)


def _record_sigma2(data, kind, theta, k):
    resid = data.survival - _model(kind, theta, data.m.astype(float))
    dof = len(resid) - k
    return float(resid @ resid / dof) if dof > 0 else float("nan")


def _solve(kind, theta0, m, y, w):
    """Levenberg-damped Gauss-Newton with p projected onto [0, 1]."""
    theta = np.array(theta0, dtype=float)
    theta[0] = np.clip(theta[0], 0.0, 1.0)

    def cost(t):
        r = y - _model(kind, t, m)
        return float(w @ (r * r))

    c = cost(theta)
    sw = np.sqrt(w)
    lam = 1e-6
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        jac = _jacobian(kind, theta, m) * sw[:, None]
        r = (y - _model(kind, theta, m)) * sw
        scale = np.sqrt(np.sum(jac * jac, axis=0)) + 1e-300
        stepped = False
        while lam < 1e16:
            # damped step from the stacked system, avoiding the normal equations
            lhs = np.vstack([jac, np.diag(np.sqrt(lam) * scale)])
            rhs = np.concatenate([r, np.zeros(len(theta))])
            delta = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
            trial = theta + delta
            trial[0] = np.clip(trial[0], 0.0, 1.0)
            ct = cost(trial)
            if ct < c or (ct == c and np.array_equal(trial, theta)):
                step = trial - theta
                theta, c = trial, ct
                lam = max(lam / 10, 1e-15)
                stepped = True
                break
            lam *= 10
        if not stepped:
            converged = True  # no descent left at machine precision
            break
        if np.all(np.abs(step) <= TOL * (1 + np.abs(theta))):
            converged = True
            break
    return theta, c, converged, it


def _unit_stderr(wjac, rcond=1e-9):
    """sqrt(diag((J^T J)^-1)) via SVD of the column-scaled Jacobian.

    Directions with relative singular value below ``rcond`` are not
    identifiable; any parameter loading on them gets an infinite error. The
    first-order model hits this near D = 0, where its D column lies in the
    span of the others.
    """
    scale = np.linalg.norm(wjac, axis=0)
    scale[scale == 0] = 1.0
    _, s, vt = np.linalg.svd(wjac / scale, full_matrices=False)
    weak = s < rcond * s[0]
    var = ((vt[~weak] / s[~weak, None]) ** 2).sum(axis=0) / scale ** 2
    if weak.any():
        loads = np.abs(vt[weak]).max(axis=0) > 1e-6
        var[loads] = np.inf
    return np.sqrt(var)


def _finish(kind, data, theta, sse, converged, it, m, w):
    d = data.d
    res = FitResult(kind, d, *theta[:3], D=theta[3] if kind == "first" else None,
                    residual_sum=sse, converged=converged, iterations=it)
    res.boundary_hit = bool(theta[0] <= BOUNDARY_TOL or theta[0] >= 1 - BOUNDARY_TOL)
    k = len(theta)
    jac = _jacobian(kind, theta, m)
    sigma2 = _record_sigma2(data, kind, theta, k)
    unit = _unit_stderr(jac * np.sqrt(w)[:, None])
    se = np.where(np.isinf(unit), np.inf, sigma2 ** 0.5 * np.where(np.isinf(unit), 0, unit))
    names = ["p", "A", "B", "D"][:k]
    res.stderr = {nm: float(v) for nm, v in zip(names, se)}
    return res


def _flat(kind, data, ybar):
    return FitResult(kind, data.d, flat_curve=True, B=float(np.mean(ybar)))


def _initial(m, y, d):
    tail = y[-max(1, len(y) // 3):]
    b = min(float(np.mean(tail)), 1.0 / d)
    gap = y - b
    ok = gap > 1e-12
    if ok.sum() >= 2:
        slope, icept = np.polyfit(m[ok], np.log(gap[ok]), 1)
        p = float(np.clip(np.exp(slope), 1e-6, 1.0))
        a = float(np.exp(icept))
    else:
        p = 0.9
        a = float(y[0] - b) / p
    return [p, a, b]


# p grid for the variable-projection start, dense towards p = 1
_P_GRID = np.concatenate([1 - np.logspace(-6, 0, 600)[::-1], [1.0]])


def _profile(kind, p, m, y, w):
    """Weighted cost and linear coefficients (A, B[, D]) at fixed p."""
    sw = np.sqrt(w)
    cols = [np.power(p, m), np.ones_like(m)]
    if kind == "first":
        cols.append(_corr_term(m, p))
    basis = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(basis * sw[:, None], y * sw, rcond=None)
    return float(w @ (y - basis @ coef) ** 2), coef


def _varpro_start(kind, m, y, w, basins=6):
    """Minimize the profile cost over p.

    The profile is scanned on a grid; the lowest few local minima are each
    refined by bounded Brent search (the first-order profile has several
    shallow basins) and the best is returned.
    """
    grid = _P_GRID[1:]
    costs = np.array([_profile(kind, p, m, y, w)[0] for p in grid])
    padded = np.concatenate([[np.inf], costs, [np.inf]])
    local = np.flatnonzero((costs <= padded[:-2]) & (costs <= padded[2:]))
    local = local[np.argsort(costs[local])][:basins]
    best_p, best_c = float(grid[local[0]]), float(costs[local[0]])
    for k in local:
        lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
        opt = optimize.minimize_scalar(lambda p: _profile(kind, p, m, y, w)[0],
                                       bounds=(lo, hi), method="bounded",
                                       options={"xatol": 1e-15, "maxiter": 500})
        if opt.fun < best_c:
            best_p, best_c = float(opt.x), float(opt.fun)
    return [best_p, *_profile(kind, best_p, m, y, w)[1]]


def _best_solve(kind, starts, m, y, w):
    runs = [_solve(kind, s, m, y, w) for s in starts]
    return min(runs, key=lambda run: run[1])


def fit_zeroth(data):
    """Fit ``A p^m + B`` to the per-m means of ``data`` (needs 3 distinct m)."""
    m, y, w = _prepare(data, 3)
    if np.var(y) < FLAT_VAR:
        return _flat("zeroth", data, y)
    starts = [_initial(m, y, data.d), _varpro_start("zeroth", m, y, w)]
    theta, sse, conv, it = _best_solve("zeroth", starts, m, y, w)
    return _finish("zeroth", data, theta, sse, conv, it, m, w)


def fit_first(data):
    """Fit the first-order model.

    The zeroth-order optimum with D = 0 is always tried, but it is a
    stationary point of the first-order cost: at D = 0 the D column of the
    Jacobian lies in the span of the others. A variable-projection start
    (scan p, solve A, B, D linearly) is therefore tried as well and the
    lower-cost solution kept.
    """
    m, y, w = _prepare(data, 4)
    if np.var(y) < FLAT_VAR:
        return _flat("first", data, y)
    z = fit_zeroth(data)
    starts = [[z.p, z.A, z.B, 0.0], _varpro_start("first", m, y, w)]
    theta, sse, conv, it = _best_solve("first", starts, m, y, w)
    return _finish("first", data, theta, sse, conv, it, m, w)


def dataset_from_curve(m, y, n=1, counts=None):
    """Wrap a noiseless curve as a dataset with one record per m (or ``counts``)."""
    m = np.asarray(m)
    y = np.asarray(y, dtype=float)
    counts = np.ones(len(m), dtype=int) if counts is None else np.asarray(counts)
    ms = np.repeat(m, counts)
    seq = np.concatenate([np.arange(c) for c in counts])
    zeros = np.zeros(len(ms), dtype=int)
    return RbDataset(n, ms, seq, np.repeat(y, counts), zeros, zeros)


def compare_models(data, threshold=3.0):
    """Fit both models and flag gate dependence when the p estimates disagree.

    The flag is raised when ``|p0 - p1| > threshold * sqrt(se0^2 + se1^2)``.
    Flat curves carry no flag decision (``gate_dependent`` is None).
    """
    f0 = fit_zeroth(data)
    f1 = fit_first(data)
    report = {"zeroth": f0.to_dict(), "first": f1.to_dict(),
              "flat_curve": f0.flat_curve or f1.flat_curve, "threshold": threshold}
    if report["flat_curve"]:
        report.update(p0=None, p1=None, diff=None, D=None, gate_dependent=None)
        return report
    diff = abs(f0.p - f1.p)
    combined = float(np.hypot(f0.stderr["p"], f1.stderr["p"]))
    report.update(p0=f0.p, p1=f1.p, diff=diff, combined_se=combined, D=f1.D,
                  D_se=f1.stderr["D"], residual_zeroth=f0.residual_sum,
                  residual_first=f1.residual_sum,
                  gate_dependent=bool(diff > threshold * combined))
    return report


class FlatClass(enum.Enum):
    P_ZERO = "P_ZERO"
    P_ONE = "P_ONE"
    A0_ZERO = "A0_ZERO"
    NOT_FLAT = "NOT_FLAT"


def classify_flat_curve(coeffs, spam=None, noise_average=None, tol=FLAT_TOL):
    """Classify why a decay curve is constant; returns ``(class, value)``.

    Checks run in the order p = 0, A0 = 0, p = 1 so that perfect noise with an
    uninformative measurement reports A0_ZERO. With ``spam`` and the average
    error operator given, the A0 = 0 case is confirmed directly as
    ``Tr[E Lambda(rho)] = Tr[E Lambda(I/d)]``. ``value`` is the constant
    fidelity, or None when the curve is not flat.
    """
    if abs(coeffs.p) <= tol:
        return FlatClass.P_ZERO, coeffs.B0
    if abs(coeffs.A0) <= tol:
        if spam is not None and noise_average is not None:
            d = spam.d
            lhs = spam.expect(noise_average)
            rhs = float(np.vdot(spam.E.reshape(-1, order="F"),
                                noise_average @ (np.eye(d) / d).reshape(-1, order="F")).real)
            if abs(lhs - rhs) > tol:
                raise ContractError("A0 = 0 but Tr[E L(rho)] != Tr[E L(I/d)]")
        return FlatClass.A0_ZERO, coeffs.B0
    if abs(coeffs.p - 1) <= tol:
        return FlatClass.P_ONE, coeffs.A0 + coeffs.B0
    return FlatClass.NOT_FLAT, None
