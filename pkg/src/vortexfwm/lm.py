"""Small Levenberg-Marquardt least-squares solver with finite-difference Jacobians."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import FitError

__all__ = ["FitResult", "levenberg_marquardt", "numeric_jacobian"]


@dataclass
class FitResult:
    """Outcome of a least-squares fit.

    ``covariance`` is the inverse normal matrix scaled by the residual
    variance SSR / (m - n); it is zero for a perfect fit.
    """

    model: str
    names: tuple
    params: np.ndarray
    covariance: np.ndarray
    rms: float
    iterations: int
    converged: bool
    n_points: int
    extra: dict = field(default_factory=dict)

    @property
    def sigmas(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.covariance), 0, None))

    def __getitem__(self, name):
        return float(self.params[self.names.index(name)])

    def to_dict(self) -> dict:
        """JSON-ready report: model, params, sigmas, rms, converged, n_points."""
        return {
            "model": self.model,
            "params": {n: float(v) for n, v in zip(self.names, self.params)},
            "sigmas": {n: float(s) for n, s in zip(self.names, self.sigmas)},
            "rms": float(self.rms),
            "converged": bool(self.converged),
            "n_points": int(self.n_points),
        }


def numeric_jacobian(fun, p, scale):
    """Central-difference Jacobian of ``fun`` at ``p``."""
    p = np.asarray(p, dtype=float)
    r0 = np.asarray(fun(p), dtype=float)
    jac = np.empty((r0.size, p.size))
    for i in range(p.size):
        h = 6e-6 * (abs(p[i]) + scale[i])
        up, dn = p.copy(), p.copy()
        up[i] += h
        dn[i] -= h
        jac[:, i] = (np.asarray(fun(up)) - np.asarray(fun(dn))) / (2 * h)
    return jac


def _gradient_cosine(jac, r):
    # MINPACK-style scale-free gradient test
    rn = np.linalg.norm(r)
    cn = np.linalg.norm(jac, axis=0)
    if rn == 0:
        return 0.0
    cn = np.where(cn == 0, 1.0, cn)
    return float(np.max(np.abs(jac.T @ r) / (cn * rn)))


def levenberg_marquardt(
    fun,
    p0,
    *,
    names=None,
    model="",
    positive=None,
    scale=None,
    max_iter=200,
    gtol=1e-10,
    xtol=1e-8,
    max_ratio=4.0,
    data_scale=None,
    raise_on_failure=True,
) -> FitResult:
    """Minimise ``sum(fun(p)**2)`` by Levenberg-Marquardt.

    Parameters
    ----------
    fun : callable
        Residual vector as a function of the parameter vector.
    p0 : array_like
        Starting point.
    positive : sequence of bool, optional
        Parameters constrained to stay positive; their steps are limited to a
        factor ``max_ratio`` per iteration. Other parameters may move by at
        most ``(max_ratio - 1) * scale`` per iteration.
    scale : array_like, optional
        Typical magnitude of each parameter (finite-difference step and step
        bound). Defaults to |p0|, with zeros replaced by the largest |p0|.
    gtol : float
        Convergence when every Jacobian column is within this cosine of
        orthogonal to the residual vector.
    xtol : float
        Once no damped step lowers the cost, the fit also counts as converged
        if the Gauss-Newton step is below ``xtol`` relative to each parameter.
    data_scale : float, optional
        Magnitude of the fitted data. Residuals below ``64 eps * data_scale``
        are rounding noise, so the gradient is zero to working precision and
        the fit counts as converged.

    Raises
    ------
    FitError
        After ``max_iter`` iterations without meeting ``gtol``, unless
        ``raise_on_failure`` is false.
    """
    p = np.array(p0, dtype=float)
    n = p.size
    names = tuple(names or (f"p{i}" for i in range(n)))
    positive = np.zeros(n, bool) if positive is None else np.asarray(positive, bool)
    if scale is None:
        scale = np.abs(p)
        scale = np.where(scale == 0, max(np.max(scale), 1e-12), scale)
    scale = np.asarray(scale, dtype=float)
    if np.any(positive & (p <= 0)):
        raise ValueError("positive parameters need a positive starting value")

    r = np.asarray(fun(p), dtype=float)
    m = r.size
    if m < n:
        raise ValueError(f"{m} residuals cannot determine {n} parameters")
    cost = r @ r
    floor = 64 * np.finfo(float).eps * (data_scale if data_scale is not None else np.sqrt(cost / m))
    lam = 1e-3
    converged = False
    it = 0
    jac = numeric_jacobian(fun, p, scale)
    for it in range(1, max_iter + 1):
        if _gradient_cosine(jac, r) <= gtol or np.sqrt(cost / m) <= floor:
            converged = True
            break
        jtj = jac.T @ jac
        g = jac.T @ r
        diag = np.diag(jtj).copy()
        diag[diag == 0] = 1.0
        improved = False
        while lam < 1e16:
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            step = _bound_step(p, step, positive, scale, max_ratio)
            trial = p + step
            r_trial = np.asarray(fun(trial), dtype=float)
            c_trial = r_trial @ r_trial
            if np.isfinite(c_trial) and c_trial < cost:
                p, r, cost = trial, r_trial, c_trial
                lam = max(lam / 3, 1e-12)
                improved = True
                break
            lam *= 4
        jac = numeric_jacobian(fun, p, scale)
        if not improved:
            # cost changes are below rounding: polish with undamped Gauss-Newton steps
            for _ in range(3):
                if _gradient_cosine(jac, r) <= gtol:
                    break
                step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
                trial = p + _bound_step(p, step, positive, scale, max_ratio)
                r_trial = np.asarray(fun(trial), dtype=float)
                c_trial = r_trial @ r_trial
                if not c_trial <= cost * (1 + 1e-9):
                    break
                p, r, cost = trial, r_trial, min(cost, c_trial)
                jac = numeric_jacobian(fun, p, scale)
            # a Gauss-Newton step below xtol means the parameters are pinned to working precision
            step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
            converged = (
                _gradient_cosine(jac, r) <= gtol
                or np.sqrt(cost / m) <= floor
                or bool(np.all(np.abs(step) <= xtol * (np.abs(p) + scale)))
            )
            break

    jtj = jac.T @ jac
    dof = m - n
    s2 = cost / dof if dof > 0 else 0.0
    cov = np.linalg.pinv(jtj) * s2
    result = FitResult(model, names, p, cov, float(np.sqrt(cost / m)), it, converged, m)
    if not converged and raise_on_failure:
        raise FitError(f"{model or 'fit'} did not converge after {it} iterations", best=result)
    return result


def _bound_step(p, step, positive, scale, max_ratio):
    step = step.copy()
    for i in range(p.size):
        if positive[i]:
            new = p[i] + step[i]
            new = min(max(new, p[i] / max_ratio), p[i] * max_ratio)
            step[i] = new - p[i]
        else:
            lim = (max_ratio - 1) * scale[i]
            step[i] = np.clip(step[i], -lim, lim)
    return step
