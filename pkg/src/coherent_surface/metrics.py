"""Logical-error estimators, finite-size-scaling fits and threshold brackets."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import curve_fit

CSV_COLUMNS = (
    "d", "p", "q", "theta", "shots", "resamples",
    "pli", "pli_err", "pld", "pld_err",
    "twirl_i", "twirl_i_err", "twirl_d", "twirl_d_err", "coh_ratio", "coh_ratio_err",
)  # fmt: skip


@dataclass(frozen=True)
class MetricEstimate:
    """Averages over noiseless shots (outer) and readout resamples (inner).

    ``pli`` is the mean of ``sin^2 theta_L`` and ``pld`` the mean of
    ``2 |sin theta_L|``. Errors are standard errors over noiseless shots.
    Twirl ratios are NaN unless an incoherent failure rate is supplied.
    """

    d: int
    p: float
    q: float
    theta: float
    shots: int
    resamples: int
    pli: float
    pli_err: float
    pld: float
    pld_err: float
    twirl_i: float = math.nan
    twirl_i_err: float = math.nan
    twirl_d: float = math.nan
    twirl_d_err: float = math.nan
    coh_ratio: float = math.nan
    coh_ratio_err: float = math.nan

    def csv_row(self) -> list[str]:
        vals = asdict(self)
        return [_fmt(vals[c]) for c in CSV_COLUMNS]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _ratio(num, den, var_num, var_den, cov):
    """Ratio of two means and its delta-method standard error."""
    if den == 0:
        return math.nan, math.nan
    r = num / den
    var = (var_num - 2 * r * cov + r * r * var_den) / (den * den)
    return r, math.sqrt(max(var, 0.0))


def estimate_metrics(
    theta_l,
    *,
    d: int = 0,
    p: float = math.nan,
    q: float = math.nan,
    theta: float = math.nan,
    p_fail: float | None = None,
    p_fail_err: float = 0.0,
) -> MetricEstimate:
    """Metrics from a ``(shots, resamples)`` array of final logical angles."""
    t = np.asarray(theta_l, dtype=float)
    if t.ndim == 1:
        t = t[:, None]
    if t.size == 0:
        raise ValueError("no records to estimate from")
    n, r = t.shape
    a = np.mean(np.sin(t) ** 2, axis=1)
    b = np.mean(2 * np.abs(np.sin(t)), axis=1)
    pli, pld = float(a.mean()), float(b.mean())
    if n > 1:
        cov = np.cov(np.vstack([a, b]), ddof=1) / n
        var_a, var_b, cov_ab = float(cov[0, 0]), float(cov[1, 1]), float(cov[0, 1])
    else:
        var_a = var_b = cov_ab = math.nan
    coh, coh_err = _ratio(pld, 2 * pli, var_b, 4 * var_a, 2 * cov_ab)
    tw = {}
    if p_fail is not None:
        var_f = p_fail_err**2
        tw["twirl_i"], tw["twirl_i_err"] = _ratio(pli, p_fail, var_a, var_f, 0.0)
        tw["twirl_d"], tw["twirl_d_err"] = _ratio(pld, 2 * p_fail, var_b, 4 * var_f, 0.0)
    return MetricEstimate(
        d=d, p=p, q=q, theta=theta, shots=n, resamples=r,
        pli=pli, pli_err=math.sqrt(var_a) if n > 1 else math.nan,
        pld=pld, pld_err=math.sqrt(var_b) if n > 1 else math.nan,
        coh_ratio=coh, coh_ratio_err=coh_err, **tw,
    )  # fmt: skip


# ---------------------------------------------------------------------------
# finite-size scaling


def scaling_ansatz(pd, p_th, nu, a, b, c):
    p, d = pd
    x = (p - p_th) * d ** (1.0 / nu)
    return a + b * x + c * x * x


@dataclass
class ThresholdFit:
    p_th: float
    p_th_err: float
    nu: float
    params: np.ndarray
    cov: np.ndarray
    chi2: float
    dof: int

    @property
    def reduced_chi2(self) -> float:
        return self.chi2 / self.dof if self.dof > 0 else math.nan


class FitError(RuntimeError):
    pass


def fit_threshold(d, p, y, sigma) -> ThresholdFit:
    """Weighted fit of ``A + B x + C x^2`` with ``x = (p - p_th) d^(1/nu)``."""
    d, p, y, sigma = (np.asarray(v, dtype=float) for v in (d, p, y, sigma))
    if len(np.unique(d)) < 3:
        raise ValueError("need at least three code distances")
    if len(np.unique(p)) < 5:
        raise ValueError("need at least five error rates")
    if np.any(sigma <= 0):
        raise ValueError("all uncertainties must be positive")
    pmin, pmax = float(p.min()), float(p.max())
    p0 = [0.5 * (pmin + pmax), 1.0, float(np.median(y)), 0.0, 0.0]
    span = pmax - pmin
    lo = [pmin - span, 0.5, -np.inf, -np.inf, -np.inf]
    hi = [pmax + span, 2.5, np.inf, np.inf, np.inf]
    try:
        popt, pcov = curve_fit(
            scaling_ansatz, (p, d), y, p0=p0, sigma=sigma, absolute_sigma=True, bounds=(lo, hi), maxfev=20000
        )
    except (RuntimeError, ValueError) as exc:
        raise FitError(f"threshold fit did not converge: {exc}") from exc
    if not np.all(np.isfinite(pcov)):
        raise FitError(f"threshold fit has a singular covariance; params={popt}")
    resid = (y - scaling_ansatz((p, d), *popt)) / sigma
    return ThresholdFit(
        p_th=float(popt[0]),
        p_th_err=float(math.sqrt(pcov[0, 0])),
        nu=float(popt[1]),
        params=popt,
        cov=pcov,
        chi2=float(resid @ resid),
        dof=len(y) - len(popt),
    )


# ---------------------------------------------------------------------------
# pairwise crossings of diamond-norm curves


@dataclass
class Crossing:
    d1: int
    d2: int
    p_cross: float
    p_cross_err: float
    found: bool = True


@dataclass
class DiamondAnalysis:
    crossings: list
    intercept: float
    intercept_err: float
    slope: float
    notes: list = field(default_factory=list)

    def drifts_down(self, nsigma: float = 2.0) -> bool:
        """Crossings decrease with growing d, each step significant at ``nsigma``."""
        ok = [c for c in self.crossings if c.found]
        if len(ok) < 2:
            return False
        for a, b in zip(ok, ok[1:]):
            gap = a.p_cross - b.p_cross
            if gap <= nsigma * math.hypot(a.p_cross_err, b.p_cross_err):
                return False
        return True


def _quad_fit(p, y, sigma):
    return np.polyfit(p, y, 2, w=1.0 / np.asarray(sigma))


def _crossing(c1, c2, lo, hi):
    roots = np.roots(np.asarray(c1) - np.asarray(c2))
    real = [float(r.real) for r in roots if abs(r.imag) < 1e-12 and lo <= r.real <= hi]
    if not real:
        return math.nan
    mid = 0.5 * (lo + hi)
    return min(real, key=lambda r: abs(r - mid))


def diamond_intersection_analysis(curves: dict, n_boot: int = 400, seed: int = 0) -> DiamondAnalysis:
    """Crossings of quadratic fits for consecutive distances, extrapolated in ``1/d``.

    ``curves`` maps ``d -> (p, y, sigma)``. The crossing of ``(d, d')`` is
    placed at ``1/d``; a weighted line through these gives the intercept.
    Errors come from a parametric bootstrap over the data points.
    """
    ds = sorted(curves)
    if len(ds) < 3:
        raise ValueError("need at least three code distances")
    rng = np.random.default_rng(seed)
    fits = {}
    boots = {}
    lo = max(float(np.min(curves[d][0])) for d in ds)
    hi = min(float(np.max(curves[d][0])) for d in ds)
    for d in ds:
        p, y, s = (np.asarray(v, dtype=float) for v in curves[d])
        fits[d] = _quad_fit(p, y, s)
        boots[d] = [_quad_fit(p, y + s * rng.standard_normal(len(y)), s) for _ in range(n_boot)]
    crossings, notes = [], []
    for d1, d2 in zip(ds, ds[1:]):
        pc = _crossing(fits[d1], fits[d2], lo, hi)
        bs = [_crossing(a, b, lo, hi) for a, b in zip(boots[d1], boots[d2])]
        bs = np.array([b for b in bs if np.isfinite(b)])
        if not np.isfinite(pc):
            notes.append(f"no crossing of d={d1} and d={d2} inside [{lo}, {hi}]")
            crossings.append(Crossing(d1, d2, math.nan, math.nan, False))
            continue
        err = float(np.std(bs, ddof=1)) if len(bs) > 1 else math.nan
        crossings.append(Crossing(d1, d2, pc, err))
    ok = [c for c in crossings if c.found]
    if len(ok) >= 2:
        x = np.array([1.0 / c.d1 for c in ok])
        y = np.array([c.p_cross for c in ok])
        e = np.array([c.p_cross_err if np.isfinite(c.p_cross_err) and c.p_cross_err > 0 else 1.0 for c in ok])
        if len(ok) == 2:
            slope = (y[1] - y[0]) / (x[1] - x[0])
            intercept = y[0] - slope * x[0]
            ierr = math.nan
        else:
            coef, cov = np.polyfit(x, y, 1, w=1.0 / e, cov="unscaled")
            slope, intercept = float(coef[0]), float(coef[1])
            ierr = float(math.sqrt(cov[1, 1]))
    else:
        slope = intercept = ierr = math.nan
        notes.append("fewer than two crossings; no extrapolation")
    return DiamondAnalysis(crossings, float(intercept), ierr, float(slope), notes)


# ---------------------------------------------------------------------------
# threshold brackets over (p, q)

SCALABLE, UNSCALABLE, INDETERMINATE = "scalable", "unscalable", "indeterminate"


def classify_point(rows, nsigma: float = 2.0) -> str:
    """Label one ``(p, q)`` point from ``[(d, pli, pli_err), ...]``.

    Scalable: ``pli`` drops significantly at every step in ``d``.
    Unscalable: it rises significantly at some step.
    """
    rows = sorted(rows)
    if len(rows) < 2:
        raise ValueError("need at least two code distances per point")
    steps = []
    for (_, a, ea), (_, b, eb) in zip(rows, rows[1:]):
        tol = nsigma * math.hypot(ea, eb)
        steps.append(-1 if b < a - tol else (1 if b > a + tol else 0))
    if any(s == 1 for s in steps):
        return UNSCALABLE
    if all(s == -1 for s in steps):
        return SCALABLE
    return INDETERMINATE


@dataclass
class ThresholdBracket:
    q: float
    lower: float  # last p still scalable (NaN if none)
    upper: float  # first p unscalable (NaN if none)
    labels: dict


def threshold_map(estimates, nsigma: float = 2.0) -> list[ThresholdBracket]:
    """Per-``q`` bracket on the threshold in ``p`` from ``MetricEstimate``-like rows."""
    grid: dict = {}
    for e in estimates:
        grid.setdefault(e.q, {}).setdefault(e.p, []).append((e.d, e.pli, e.pli_err))
    out = []
    for q in sorted(grid):
        labels = {p: classify_point(grid[q][p], nsigma) for p in sorted(grid[q])}
        ps = sorted(labels)
        unscalable = [p for p in ps if labels[p] == UNSCALABLE]
        upper = unscalable[0] if unscalable else math.nan
        scalable = [p for p in ps if labels[p] == SCALABLE and (math.isnan(upper) or p < upper)]
        lower = scalable[-1] if scalable else math.nan
        out.append(ThresholdBracket(q, lower, upper, labels))
    return out
