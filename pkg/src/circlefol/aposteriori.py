"""Condition numbers and a-posteriori diagnostics for a computed triple.

All norms are grid estimators (lower bounds of the true suprema) evaluated
at the given triple only, not over a ball around it; the report therefore
exposes raw numbers next to configurable pass/fail thresholds rather than a
rigorous certificate.
"""
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .cohomology import dynamical_average
from .fourier import invert_circle_map, sup_norm
from .jets import analyticity_radius_estimate, jet_det, taylor_tail_ratio
from .newton import compute_error, frame


@dataclass
class Thresholds:
    residual: float = 1e-8
    m_min: float = 2.0
    det_min: float = 1e-8
    tail_ratio: float = 1e-6


@dataclass
class ConditionReport:
    lambda_c0: float
    lambda_star: float
    lambda_star_n: int
    da_c0: float
    da_inv_c0: float
    dainv_c0: float
    m_max: float
    residuals: dict
    frame_det_min: float
    taylor_tail_ratio: float
    analyticity_radius: float
    delta: float
    flags: dict = field(default_factory=dict)
    # m_max is evaluated at the triple itself, not minimized over a ball
    m_max_scope: str = "point"

    def to_dict(self):
        d = asdict(self)
        d["residuals"] = {str(k): v for k, v in self.residuals.items()}
        return {k: _jsonable(v) for k, v in d.items()}

    @classmethod
    def from_dict(cls, d):
        d = {k: _unjson(v) for k, v in d.items()}
        d["residuals"] = {float(k): _unjson(v) for k, v in d["residuals"].items()}
        return cls(**d)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, float) and not math.isfinite(v):
        return "inf" if v > 0 else ("-inf" if v < 0 else "nan")
    return v


def _unjson(v):
    if isinstance(v, dict):
        return {k: _unjson(x) for k, x in v.items()}
    if v in ("inf", "-inf", "nan"):
        return float(v)
    return v


def m_max_condition0(lambda_c0, da_c0, da_inv_c0, dainv_c0):
    """Upper end of the admissible regularity window minus two.

    ``min(-ln(|lam| |Da^-1|)/ln|Da|, -ln|lam|/ln|D(a^-1)|, -ln|lam|/ln|Da|) - 2``
    where a ratio whose denominator log is ``<= 0`` counts as ``+inf``.
    """
    if lambda_c0 <= 0:
        return math.inf
    terms = []
    for num, den in (
        (-math.log(lambda_c0 * da_inv_c0), da_c0),
        (-math.log(lambda_c0), dainv_c0),
        (-math.log(lambda_c0), da_c0),
    ):
        lden = math.log(den)
        terms.append(num / lden if lden > 1e-12 else math.inf)
    return min(terms) - 2.0


def condition_report(f, u, thresholds=None, lambda_star_n=64):
    thresholds = thresholds or Thresholds()
    lam_c0 = sup_norm(u.lam)
    da = u.a.derivative()
    da_c0 = sup_norm(da)
    da_inv_c0 = float(np.max(1.0 / np.abs(da.values)))
    try:
        dainv_c0 = sup_norm(invert_circle_map(u.a).derivative())
    except Exception:
        dainv_c0 = math.inf
    lam_star = dynamical_average(u.lam, u.a, lambda_star_n)
    e = compute_error(f, u)
    residuals = {r: e.norm(r, u.delta) for r in (0.0, 1.0, 2.0)}
    det_min = float(np.min(np.abs(jet_det(frame(u.W)).coeffs[0])))
    tail = max(taylor_tail_ratio(u.W.x.periodic_part(), u.delta), taylor_tail_ratio(u.W.y, u.delta))
    if u.order >= 4:
        radius = min(analyticity_radius_estimate(u.W.x), analyticity_radius_estimate(u.W.y))
    else:
        radius = math.nan
    report = ConditionReport(
        lambda_c0=lam_c0,
        lambda_star=lam_star,
        lambda_star_n=lambda_star_n,
        da_c0=da_c0,
        da_inv_c0=da_inv_c0,
        dainv_c0=dainv_c0,
        m_max=m_max_condition0(lam_c0, da_c0, da_inv_c0, dainv_c0) if lam_c0 < 1 else -math.inf,
        residuals=residuals,
        frame_det_min=det_min,
        taylor_tail_ratio=tail,
        analyticity_radius=radius,
        delta=u.delta,
    )
    report.flags = verdict_flags(report, thresholds)
    return report


def verdict_flags(report, thresholds):
    return {
        "contraction_ok": bool(report.lambda_c0 < 1.0 or report.lambda_star < 1.0),
        "regularity_ok": bool(report.m_max >= thresholds.m_min),
        "frame_ok": bool(report.frame_det_min >= thresholds.det_min),
        "residual_small": bool(report.residuals[0.0] < thresholds.residual),
    }


@dataclass
class Verdict:
    passed: bool
    flags: dict
    explanations: dict

    def summary(self):
        head = "PASS" if self.passed else "FAIL"
        lines = [head] + [f"  {k}: {'ok' if v else 'FAILED'} ({self.explanations[k]})" for k, v in self.flags.items()]
        return "\n".join(lines)


def verify_aposteriori(report, thresholds=None):
    """Single pass/fail; passing needs every flag."""
    thresholds = thresholds or Thresholds()
    flags = verdict_flags(report, thresholds)
    explanations = {
        "contraction_ok": f"||lambda||_C0={report.lambda_c0:.4g}, lambda*={report.lambda_star:.4g} (need < 1)",
        "regularity_ok": f"m_max={report.m_max:.4g} (need >= {thresholds.m_min:g})",
        "frame_ok": f"min|det DW|={report.frame_det_min:.4g} (need >= {thresholds.det_min:g})",
        "residual_small": f"||e||_X0={report.residuals[0.0]:.3e} (need < {thresholds.residual:g})",
    }
    if report.analyticity_radius < report.delta:
        explanations["residual_small"] += f"; warning: analyticity radius {report.analyticity_radius:.3g} < delta"
    return Verdict(all(flags.values()), flags, explanations)
