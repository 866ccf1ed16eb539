"""LEAR correlation model: matrices, the ARMA(1,1) reparameterization,
simulation and profile-likelihood fitting."""

import json

from . import _core
from ._core import (
    SCHEMA_VERSION,
    LearError,
    arma11_covariance,
    profile_loglik,
)

__all__ = [
    "SCHEMA_VERSION",
    "LearError",
    "arma11_covariance",
    "arma_to_lear",
    "check_special_case",
    "compare",
    "fit",
    "lear_correlation",
    "lear_covariance",
    "lear_to_arma",
    "profile_loglik",
    "simulate",
]


def _grid(times):
    """Accept one subject's times or a list of per-subject times."""
    times = list(times)
    if times and not hasattr(times[0], "__len__"):
        return [times]
    return [list(t) for t in times]


def lear_correlation(rho_l, delta, times, subject=0, d_min=None, d_max=None):
    return _core._lear_correlation(rho_l, delta, _grid(times), subject, d_min, d_max)


def lear_covariance(sigma2, rho_l, delta, times, subject=0, d_min=None, d_max=None):
    return _core._lear_covariance(sigma2, rho_l, delta, _grid(times), subject, d_min, d_max)


def check_special_case(times):
    return json.loads(_core._check_special_case(_grid(times)))


def lear_to_arma(sigma2, rho_l, delta, times):
    return json.loads(_core._lear_to_arma(sigma2, rho_l, delta, _grid(times)))


def arma_to_lear(sigma2, tau, rho_a, times):
    return json.loads(_core._arma_to_lear(sigma2, tau, rho_a, _grid(times)))


def simulate(spec):
    """Simulate from a spec dict (same fields as the CLI's JSON spec).

    Returns a dict of equal-length lists: subject, time, y and x (design rows).
    """
    subject, time, y, x = _core._simulate(json.dumps(spec))
    return {"subject": subject, "time": time, "y": y, "x": x}


def _fit_args(grid_points=21, rho_cap=0.99, delta_cap=5.0, max_iter=2000, tol=1e-12, allow_negative=False,
              threads=1):
    return dict(grid_points=grid_points, rho_cap=rho_cap, delta_cap=delta_cap, max_iter=max_iter, tol=tol,
                allow_negative=allow_negative, threads=threads)


def fit(subject, time, y, param="lear", criterion="ml", design="intercept", covariates=(), **options):
    """Fit LEAR or ARMA(1,1) by profile ML/REML; returns the fit_result record."""
    doc = _core._fit([str(s) for s in subject], list(time), list(y), param, criterion, design,
                     [list(r) for r in covariates], **_fit_args(**options))
    return json.loads(doc)


def compare(subject, time, y, criterion="ml", design="intercept", covariates=(), **options):
    """Fit both parameterizations; returns the comparison_report record."""
    doc = _core._compare([str(s) for s in subject], list(time), list(y), criterion, design,
                         [list(r) for r in covariates], **_fit_args(**options))
    return json.loads(doc)
