"""Least-squares fits used to analyse simulated and measured data.

All fits are either linear least squares or a one-dimensional search
wrapped around a linear inner problem, so no general nonlinear solver is
needed.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np
from scipy.optimize import minimize_scalar

from ..thermal import populations_thermal

MODELS = ("sinusoid_2phi", "quadratic", "nbar_populations", "gaussian_decay")


class FitError(RuntimeError):
    """Fit failed or the data cannot constrain the model."""

    def __init__(self, message, rms_residual=float("nan")):
        super().__init__(message)
        self.rms_residual = rms_residual


@dataclasses.dataclass
class FitResult:
    model: str
    params: dict
    stderr: dict
    rms_residual: float
    info: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if not self.rms_residual >= 0:
            raise ValueError("rms_residual must be non-negative")
        for k, v in self.params.items():
            if not np.isfinite(v):
                raise FitError(f"parameter {k} is not finite", self.rms_residual)

    def as_dict(self):
        return {"model": self.model, "params": dict(self.params),
                "stderr": dict(self.stderr), "rms_residual": self.rms_residual,
                **({"info": dict(self.info)} if self.info else {})}


def _rms(r):
    return float(np.sqrt(np.mean(np.square(r))))


def _covariance(jac, resid):
    """Parameter covariance ``s^2 (J^T J)^-1`` with ``s^2`` the residual variance."""
    dof = max(len(resid) - jac.shape[1], 1)
    s2 = float(np.sum(np.square(resid))) / dof
    jtj = jac.T @ jac
    try:
        return s2 * np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        return np.full(jtj.shape, np.inf)


def _wrap(phase):
    return float((phase + np.pi) % (2 * np.pi) - np.pi)


def _sin_design(x, f, offset):
    cols = [np.sin(f * x), np.cos(f * x)]
    if offset:
        cols.append(np.ones_like(x))
    return np.column_stack(cols)


def fit_sinusoid(x, y, frequency=2.0, offset=False):
    """Fit ``y = A sin(f x + phi0) [+ c]``.

    With ``frequency`` given (default 2, the parity-fringe case) the fit is
    linear.  With ``frequency=None`` the angular frequency is found by a
    bounded scalar search over the linear-inner residual.  ``A >= 0`` by
    shifting ``phi0`` by pi.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if len(x) < 5:
        raise ValueError("need at least 5 points")
    span = x.max() - x.min()

    def solve(f):
        design = _sin_design(x, f, offset)
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        return coef, y - design @ coef

    if frequency is None:
        f = _search_frequency(x, y, offset, solve)
    else:
        f = float(frequency)
        if f * span < np.pi - 1e-12:
            raise ValueError("data must span at least half a period")
    coef, resid = solve(f)
    s, c = coef[0], coef[1]
    amp = math.hypot(s, c)
    phase = math.atan2(c, s)
    rms = _rms(resid)
    # Jacobian in (A, phi0, [c], [f]) at the optimum
    arg = f * x + phase
    cols = [np.sin(arg), amp * np.cos(arg)]
    names = ["amplitude", "phase"]
    if offset:
        cols.append(np.ones_like(x))
        names.append("offset")
    if frequency is None:
        cols.append(amp * x * np.cos(arg))
        names.append("frequency")
    cov = _covariance(np.column_stack(cols), resid)
    err = {k: float(np.sqrt(max(cov[i, i], 0.0))) for i, k in enumerate(names)}
    params = {"amplitude": amp, "phase": _wrap(phase), "frequency": f}
    if offset:
        params["offset"] = float(coef[2])
    if not all(np.isfinite(v) for v in params.values()):
        raise FitError("sinusoid fit did not converge", rms)
    return FitResult("sinusoid_2phi", params, err, rms)


def _search_frequency(x, y, offset, solve):
    span = x.max() - x.min()
    dx = np.min(np.diff(np.sort(x)))
    f_lo, f_hi = np.pi / span, np.pi / dx
    grid = np.linspace(f_lo, f_hi, 400)
    cost = np.array([np.sum(solve(f)[1] ** 2) for f in grid])
    i = int(np.argmin(cost))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(lambda f: np.sum(solve(f)[1] ** 2), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-12 * f_hi})
    if not res.success:
        raise FitError("frequency search did not converge", _rms(solve(grid[i])[1]))
    return float(res.x)


def fit_quadratic_detuning(detuning_hz, fidelity):
    """Fit ``F = F_max + c (x - x0)^2`` and return ``c``, ``x0`` and ``F_max``.

    ``c`` is in units of 1/Hz^2 when ``detuning_hz`` is in Hz.  A positive
    curvature triggers a warning since the data then show no maximum.
    """
    x = np.asarray(detuning_hz, dtype=float)
    y = np.asarray(fidelity, dtype=float)
    if len(x) < 5:
        raise ValueError("need at least 5 points")
    scale = float(np.max(np.abs(x))) or 1.0
    u = x / scale
    design = np.column_stack([np.ones_like(u), u, u * u])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    a0, a1, a2 = coef
    if a2 >= 0:
        warnings.warn("upward curvature: detuning data have no maximum", RuntimeWarning)
    c = a2 / scale ** 2
    x0 = -a1 / (2 * a2) * scale if a2 != 0 else float("nan")
    f_max = a0 - a1 * a1 / (4 * a2) if a2 != 0 else float("nan")
    if a2 < 0 and not x.min() <= x0 <= x.max():
        warnings.warn("fitted maximum lies outside the scanned range", RuntimeWarning)
    cov = _covariance(design, resid)
    # propagate to (c, x0, F_max)
    g = np.array([[0, 0, 1 / scale ** 2],
                  [0, -scale / (2 * a2), a1 * scale / (2 * a2 ** 2)],
                  [1, -a1 / (2 * a2), a1 * a1 / (4 * a2 ** 2)]]) if a2 != 0 else np.zeros((3, 3))
    pc = g @ cov @ g.T
    names = ["curvature", "center", "f_max"]
    return FitResult("quadratic", {"curvature": float(c), "center": float(x0),
                                   "f_max": float(f_max)},
                     {k: float(np.sqrt(max(pc[i, i], 0.0))) for i, k in enumerate(names)},
                     _rms(resid))


def golden_section(fun, lo, hi, tol=1e-10, max_iter=200):
    """Minimise a unimodal scalar function on ``[lo, hi]``."""
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = fun(d)
    x = (a + b) / 2
    return x, fun(x)


def fit_nbar(t, p0, p1, p2, p, env=None, nbar_max=200.0):
    """Fit the mean phonon number to population time traces.

    The model is the thermal closed form for the populations; all three
    populations enter the residual.  A coarse logarithmic grid brackets the
    minimum and a golden-section search refines it.
    """
    t = np.asarray(t, dtype=float)
    data = np.column_stack([p0, p1, p2]).astype(float)
    if data.shape != (len(t), 3):
        raise ValueError("t and populations must have equal lengths")

    def model(nbar):
        q2, q1, q0 = populations_thermal(p, nbar, t, env)
        return np.column_stack([q0, q1, q2])

    def cost(nbar):
        return float(np.sum((model(nbar) - data) ** 2))

    sensitivity = np.max(np.abs(model(0.0) - model(50.0)))
    if sensitivity < 1e-6:
        raise FitError("data insensitive to nbar: ill-conditioned fit", _rms(model(0.0) - data))
    inside = (t > 0) & (t < p.t_gate)
    if np.count_nonzero(inside) < 8:
        raise ValueError("need at least 8 samples inside (0, t_gate)")
    grid = np.concatenate([[0.0], np.geomspace(1e-3, nbar_max, 120)])
    costs = np.array([cost(n) for n in grid])
    i = int(np.argmin(costs))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    nbar, best = golden_section(cost, lo, hi, tol=1e-12)
    if costs[0] < best:
        nbar, best = 0.0, costs[0]
    resid = (model(nbar) - data).ravel()
    # curvature-based standard error
    h = max(1e-4, 1e-3 * nbar)
    jac = ((model(nbar + h) - model(max(nbar - h, 0.0))).ravel()
           / (nbar + h - max(nbar - h, 0.0)))[:, None]
    cov = _covariance(jac, resid)
    return FitResult("nbar_populations", {"nbar": float(nbar)},
                     {"nbar": float(np.sqrt(max(cov[0, 0], 0.0)))}, _rms(resid))


def fit_gate_decay(n_gates, amplitude):
    """Compare a Gaussian decay of the parity amplitude with a linear one.

    The Gaussian model is a quadratic polynomial in ``log A`` (a Gaussian
    ``exp(-(N/N0)^2)`` times an exponential loss from incoherent errors).
    Returns the Gaussian fit with ``info['residual_ratio']`` equal to the
    rms residual of a straight-line fit divided by that of the Gaussian.
    """
    n = np.asarray(n_gates, dtype=float)
    a = np.asarray(amplitude, dtype=float)
    if len(n) < 4:
        raise ValueError("need at least 4 gate counts")
    if np.any(a <= 0):
        raise FitError("amplitudes must be positive for a log fit")
    design = np.column_stack([np.ones_like(n), n, n * n])
    coef, *_ = np.linalg.lstsq(design, np.log(a), rcond=None)
    gauss = np.exp(design @ coef)
    resid = a - gauss
    lin_design = np.column_stack([np.ones_like(n), n])
    lin, *_ = np.linalg.lstsq(lin_design, a, rcond=None)
    lin_resid = a - lin_design @ lin
    rms_g, rms_l = _rms(resid), _rms(lin_resid)
    c0, c1, c2 = coef
    n0 = 1 / math.sqrt(-c2) if c2 < 0 else float("inf")
    cov = _covariance(design * gauss[:, None], resid)
    err = {k: float(np.sqrt(max(cov[i, i], 0.0))) for i, k in enumerate(["log_a0", "rate", "c2"])}
    err["n0"] = 0.5 * err["c2"] * abs(c2) ** -1.5 if c2 < 0 else float("inf")
    params = {"a0": float(math.exp(c0)), "rate": float(-c1), "n0": n0,
              "linear_intercept": float(lin[0]), "linear_slope": float(lin[1])}
    if not np.isfinite(n0):
        params.pop("n0")
    ratio = rms_l / rms_g if rms_g > 0 else float("inf")
    return FitResult("gaussian_decay", params, err, rms_g,
                     {"linear_rms": rms_l, "residual_ratio": ratio})
