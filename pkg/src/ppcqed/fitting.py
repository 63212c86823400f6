"""Derivative-free least squares on top of scipy's Nelder-Mead simplex.

Parameters are optimised in scaled coordinates ``u = (x - x0) / scale`` so
that the simplex tolerance acts as a relative tolerance on each parameter.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize


class FitError(RuntimeError):
    pass


class ConvergenceError(FitError):
    pass


class DegenerateDataError(FitError, ValueError):
    pass


@dataclass
class FitResult:
    parameters: dict
    residual_norm: float
    iterations: int
    converged: bool
    parameter_uncertainties: dict = field(default_factory=dict)
    gradient_norm: float = float("nan")
    n_data: int = 0

    def __getitem__(self, name):
        return self.parameters[name]


def _jacobian(residuals, x, step):
    r0 = residuals(x)
    jac = np.empty((r0.size, x.size))
    for k in range(x.size):
        dx = np.zeros_like(x)
        dx[k] = step[k]
        jac[:, k] = (residuals(x + dx) - residuals(x - dx)) / (2 * step[k])
    return r0, jac


def uncertainties(residuals, x, scale, rel_step=1e-6):
    """1-sigma errors from the Gauss-Newton curvature of the residual sum.

    Returns (sigma, gradient_norm); sigma is NaN where the curvature is singular.
    """
    step = rel_step * np.abs(scale)
    r0, jac = _jacobian(residuals, x, step)
    dof = max(r0.size - x.size, 1)
    s2 = float(r0 @ r0) / dof
    grad = 2 * jac.T @ r0
    try:
        cov = s2 * np.linalg.inv(jac.T @ jac)
        sigma = np.sqrt(np.abs(np.diag(cov)))
    except np.linalg.LinAlgError:
        sigma = np.full(x.size, np.nan)
    gnorm = float(np.linalg.norm(grad * np.abs(scale)))
    return sigma, gnorm


def least_squares_simplex(residuals, x0, scale, names, *, xatol=1e-9, fatol=1e-12,
                          maxiter=10_000, restarts=3, seed=0, raise_on_failure=True):
    """Minimise sum(residuals(x)**2) with restarted Nelder-Mead.

    ``residuals`` maps a parameter vector to a real residual vector. Each
    restart rebuilds a fresh simplex around the incumbent with seeded random
    orientation; restarts stop once the objective no longer improves.
    """
    x0 = np.asarray(x0, dtype=float)
    scale = np.asarray(scale, dtype=float)
    rng = np.random.default_rng(seed)

    def objective(u):
        r = residuals(x0 + u * scale)
        val = float(r @ r)
        return val if np.isfinite(val) else np.inf

    u = np.zeros_like(x0)
    best = objective(u)
    total_iter = 0
    converged = False
    radius = 0.1
    for attempt in range(restarts + 1):
        if attempt == 0:
            simplex = np.vstack([u] + [u + radius * e for e in np.eye(u.size)])
        else:
            signs = rng.choice([-1.0, 1.0], size=u.size)
            simplex = np.vstack([u] + [u + radius * s * e for s, e in zip(signs, np.eye(u.size))])
        res = minimize(objective, u, method="Nelder-Mead",
                       options=dict(initial_simplex=simplex, xatol=xatol, fatol=fatol,
                                    maxiter=maxiter, maxfev=4 * maxiter))
        total_iter += res.nit
        improved = best - res.fun
        if res.fun <= best:
            u, best = res.x, res.fun
        converged = bool(res.success)
        if attempt > 0 and improved <= fatol * max(best, 1e-300) + 1e-300:
            break
        radius = max(radius * 0.1, 1e-6)
    if not converged and raise_on_failure:
        raise ConvergenceError(f"simplex did not converge after {total_iter} iterations")
    x = x0 + u * scale
    sigma, gnorm = uncertainties(residuals, x, scale)
    r = residuals(x)
    return FitResult(
        parameters=dict(zip(names, map(float, x))),
        residual_norm=float(np.sqrt(r @ r)),
        iterations=total_iter,
        converged=converged,
        parameter_uncertainties=dict(zip(names, map(float, sigma))),
        gradient_norm=gnorm,
        n_data=int(r.size),
    )
