"""Norm moments, concentration defects, and thin-shell width estimation.

For the power-law model in dimension n with tail rank r, every norm moment
has a closed Beta-ratio form, so the moment defect

    alpha_p = (E|X|^p)^(1/p) / (E|X|^2)^(1/2) - 1

is exact, as is its dimension-free limit as n grows.  The empirical side
lives here too: Monte-Carlo moments with delta-method errors, the
fixed-point thin-shell width of a radius sample, a fourth-moment Chebyshev
envelope for that width, a second/f Paley-Zygmund lower tail bound, and the
Kolmogorov distance of one-dimensional projections from the Gaussian they
approach in high dimension.

Calibrated constants (the leading constant of the thin-shell bound and the
envelopes measured for auxiliary inequalities) are packaged as JSON and are
only ever written by the ``calibrate`` subcommand.
"""

from __future__ import annotations

import importlib.resources
import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from scipy.special import erfc

from ._quad import log_power_moment
from .measures import MeasureModel
from .sampling import SampleBatch
from .specfun import beta_ratio_log, log_gamma

__all__ = [
    "MomentEstimate",
    "ThinShellEstimate",
    "BoundValue",
    "CalibConstants",
    "CalibrationMissing",
    "exact_moment_fnr",
    "mc_moment",
    "alpha_p",
    "alpha_limit",
    "theorem_bound",
    "epsilon_thin_shell",
    "chebyshev_link",
    "chebyshev_epsilon",
    "paley_zygmund_lower",
    "gaussian_cdf",
    "kolmogorov_distance",
    "wilson_interval",
    "calibration_path",
    "load_calibration",
    "save_calibration",
]

_CHUNK = 1 << 20


def exact_moment_fnr(n: int, r: float, p: float) -> float:
    """(E|X|^p)^(1/p) for the power-law model; finite for -n < p < r.

    The radius substitution u = c2 t / (1 + c2 t) turns the moment integral
    into a Beta ratio: E|X|^p = c2^-p B(n + p, r - p) / B(n, r).  At p = 0
    the value continues analytically to the geometric mean exp(E log|X|).
    """
    n = int(n)
    r = float(r)
    p = float(p)
    if not -n < p < r:
        raise ValueError(f"moment order must lie in (-{n}, {r}), got {p}")
    c2 = math.sqrt((n + 1.0) / ((r - 1.0) * (r - 2.0)))
    return math.exp(beta_ratio_log(n, r, p)) / c2


def _radial_log_moment(model: MeasureModel, p: float) -> float:
    """log E|X|^p of a radial model up to one model-wide constant.

    Returns log of int t^(n+p-1) w(t) dt normalized by the p = 0 integral,
    so sphere area and total mass cancel in the ratio.
    """
    prof = model.profile
    base = log_power_moment(prof.log_value, float(model.n),
                            tail_index=prof.tail_index, scale=prof.scale)
    raised = log_power_moment(prof.log_value, model.n + p,
                              tail_index=prof.tail_index, scale=prof.scale)
    return raised - base


def alpha_p(model, p: float, method: str = "auto", sample=None) -> float:
    """Moment defect |(E|X|^p)^(1/p) / (E|X|^2)^(1/2) - 1| of a model.

    ``model`` is a MeasureModel, or an (n, r) pair naming a power-law
    family member.  Power-law radial models evaluate the exact Beta-ratio
    closed form; tabulated radial profiles integrate by quadrature; other
    kinds need a Monte-Carlo ``sample`` (radii or a batch).  ``method``
    forces a route: closed_form, quadrature, or monte_carlo.
    """
    p = float(p)
    if p == 0.0:
        raise ValueError("moment defect is undefined at p = 0")
    if isinstance(model, (tuple, list)) and len(model) == 2:
        n, r = int(model[0]), float(model[1])
        if method not in ("auto", "closed_form"):
            raise ValueError("an (n, r) pair only supports the closed form")
        return abs(exact_moment_fnr(n, r, p) / math.sqrt(n) - 1.0)
    if not isinstance(model, MeasureModel):
        raise TypeError("model must be a MeasureModel or an (n, r) pair")
    if method == "auto":
        if model.kind == "radial" and model.profile.kind == "power_law":
            method = "closed_form"
        elif model.kind == "radial":
            method = "quadrature"
        else:
            method = "monte_carlo"
    if method == "closed_form":
        if model.kind != "radial" or model.profile.kind != "power_law":
            raise ValueError("closed form needs a radial power-law model")
        return abs(exact_moment_fnr(model.n, model.r, p)
                   / exact_moment_fnr(model.n, model.r, 2.0) - 1.0)
    if method == "quadrature":
        if model.kind != "radial":
            raise ValueError("norm moments by quadrature need a radial model")
        log_mp = _radial_log_moment(model, p) / p
        log_m2 = _radial_log_moment(model, 2.0) / 2.0
        return abs(math.exp(log_mp - log_m2) - 1.0)
    if method == "monte_carlo":
        if sample is None:
            raise ValueError("monte_carlo route needs a sample")
        mp = mc_moment(sample, p, r=model.r)
        m2 = mc_moment(sample, 2.0, r=model.r)
        return abs(mp.value / m2.value - 1.0)
    raise ValueError(f"unknown method {method!r}")


def alpha_limit(r: float, p: float) -> float:
    """Dimension-free limit of the moment defect as n grows, rank r fixed.

    Only the tail factor survives: (Gamma(r-p)/Gamma(r))^(1/p) normalized
    by the p = 2 case.  Defined for 2 < p < r.
    """
    r = float(r)
    p = float(p)
    if not 2.0 < p < r:
        raise ValueError(f"need 2 < p < r, got p={p}, r={r}")
    log_m2 = 0.5 * (log_gamma(r - 2.0) - log_gamma(r))
    log_mp = (log_gamma(r - p) - log_gamma(r)) / p
    return math.exp(log_mp - log_m2) - 1.0


@dataclass
class MomentEstimate:
    """Monte-Carlo (E|X|^p)^(1/p) with a delta-method standard error."""

    value: float
    se: float
    p: float
    count: int
    raw_mean: float
    heavy_tail: bool = False


def mc_moment(sample, p: float, r: float | None = None) -> MomentEstimate:
    """Estimate (E|X|^p)^(1/p) from radii or a sample batch.

    Accumulation is chunked with exact summation of the partial sums so
    billion-scale batches lose no precision.  When the generating rank r is
    known and 2|p| >= r the estimator's variance is infinite or near it;
    the estimate is still returned but flagged heavy_tail.
    """
    p = float(p)
    if p == 0.0:
        raise ValueError("moment order zero is a geometric mean; use p != 0")
    if isinstance(sample, SampleBatch):
        radii = sample.radii
        if r is None and sample.model and "r" in sample.model:
            r = float(sample.model["r"])
    else:
        radii = np.asarray(sample, dtype=float)
    if radii.ndim != 1:
        raise ValueError("mc_moment expects radii (1-D)")
    count = radii.size
    if count == 0:
        raise ValueError("empty sample")
    sums, sqsums = [], []
    for lo in range(0, count, _CHUNK):
        v = radii[lo:lo + _CHUNK] ** p
        sums.append(float(v.sum()))
        sqsums.append(float((v * v).sum()))
    mean = math.fsum(sums) / count
    mean_sq = math.fsum(sqsums) / count
    var = max(mean_sq - mean * mean, 0.0)
    se_mean = math.sqrt(var / count)
    value = mean ** (1.0 / p)
    se = value / (abs(p) * mean) * se_mean if mean > 0 else math.inf
    heavy = r is not None and 2.0 * abs(p) >= float(r)
    return MomentEstimate(value=value, se=se, p=p, count=count,
                          raw_mean=mean, heavy_tail=heavy)


@dataclass
class BoundValue:
    """Thin-shell width bound with its precondition status."""

    value: float
    linear_term: float
    power_term: float
    applies: bool
    p_cap: float


def theorem_bound(n: int, r: float, p: float, cstar: float,
                  cond: float = 1.0, c_pre: float = 0.6) -> BoundValue:
    """Two-term thin-shell width bound for rank-r measures in dimension n.

    value = cstar |p - 2| / r + (cstar |p - 2| cond^(1/3) / n^(1/3))^(3/5),
    valid when |p| stays below c_pre * min(r, (n / cond)^(1/3)).  ``cond`` is
    the isotropy condition number (1 for exactly isotropic models).
    """
    n = int(n)
    r = float(r)
    p = float(p)
    if cond < 1.0:
        raise ValueError("condition number is at least 1")
    p_cap = c_pre * min(r, (n / cond) ** (1.0 / 3.0))
    dev = abs(p - 2.0)
    linear = cstar * dev / r
    power = (cstar * dev * cond ** (1.0 / 3.0) / n ** (1.0 / 3.0)) ** 0.6
    return BoundValue(value=linear + power, linear_term=linear,
                      power_term=power, applies=abs(p) <= p_cap, p_cap=p_cap)


def wilson_interval(successes: int, total: int, z: float = 1.959963984540054):
    """Wilson score interval for a binomial proportion (default 95%)."""
    if total <= 0:
        raise ValueError("total must be positive")
    phat = successes / total
    z2 = z * z
    denom = 1.0 + z2 / total
    center = (phat + z2 / (2.0 * total)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / total
                         + z2 / (4.0 * total * total)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


@dataclass
class ThinShellEstimate:
    """Fixed point of the empirical shell-deviation survival function.

    epsilon is the smallest observed deviation d of |X|/sqrt(n) from 1 whose
    empirical exceedance probability G(d) = #{deviations > d}/N has dropped
    to d or below; survival is G(epsilon) and (survival_lo, survival_hi) its
    Wilson bracket.  curve_t / curve_g hold a downsampled survival curve.
    """

    epsilon: float
    survival: float
    survival_lo: float
    survival_hi: float
    count: int
    curve_t: np.ndarray
    curve_g: np.ndarray


def epsilon_thin_shell(sample, n: int | None = None,
                       curve_points: int = 512) -> ThinShellEstimate:
    """Thin-shell width of a sample: solve G(eps) <= eps on the sorted data.

    ``sample`` is a SampleBatch or an array of radii; n is the ambient
    dimension (taken from the batch when present).  Deviations are
    | t / sqrt(n) - 1 | and G counts strict exceedances.
    """
    if isinstance(sample, SampleBatch):
        radii = sample.radii
        n = sample.n if n is None else n
    else:
        radii = np.asarray(sample, dtype=float)
    if n is None:
        raise ValueError("ambient dimension n is required for raw radii")
    if radii.ndim != 1 or radii.size == 0:
        raise ValueError("need a nonempty 1-D radius sample")
    count = radii.size
    dev = np.abs(radii / math.sqrt(n) - 1.0)
    dev.sort()
    # at the i-th order statistic (1-based), G(d_(i)) <= (count - i)/count,
    # with equality unless tied; the first index where (count - i)/count
    # <= d_(i) gives the fixed point.
    idx = np.arange(1, count + 1)
    ok = (count - idx) / count <= dev
    first = int(np.argmax(ok))  # ok[-1] is always True since dev >= 0
    eps = float(dev[first])
    exceed = int((dev > eps).sum())
    lo, hi = wilson_interval(exceed, count)
    # downsample the survival curve on quantile ranks for reporting
    take = np.unique(np.linspace(0, count - 1, min(curve_points, count)).astype(int))
    curve_t = dev[take]
    curve_g = (count - (take + 1)) / count
    return ThinShellEstimate(epsilon=eps, survival=exceed / count,
                             survival_lo=lo, survival_hi=hi, count=count,
                             curve_t=curve_t, curve_g=curve_g)


def chebyshev_link(sample, n: int | None = None,
                   r: float | None = None) -> tuple[float, float]:
    """Thin-shell width of a batch next to its fourth-moment envelope.

    Returns (epsilon_hat, (16 alpha_4)^(1/3)).  The defect alpha_4 is
    closed form when the batch descriptor names a power-law model and
    Monte-Carlo from the batch otherwise; either way the rank must satisfy
    r > 4 for the fourth moment to exist.
    """
    descriptor = sample.model if isinstance(sample, SampleBatch) else None
    if r is None and descriptor and "r" in descriptor:
        r = float(descriptor["r"])
    if r is None:
        raise ValueError("rank r is required for the fourth-moment envelope")
    if r <= 4.0:
        raise ValueError(f"fourth moment diverges for rank r <= 4, got {r}")
    if descriptor and descriptor.get("kind") == "fnr":
        a4 = alpha_p((int(descriptor["n"]), r), 4.0)
    else:
        m4 = mc_moment(sample, 4.0, r=r)
        m2 = mc_moment(sample, 2.0, r=r)
        a4 = abs(m4.value / m2.value - 1.0)
    est = epsilon_thin_shell(sample, n)
    return est.epsilon, chebyshev_epsilon(a4)


def chebyshev_epsilon(alpha4: float) -> float:
    """Fourth-moment envelope for the thin-shell width: (16 alpha_4)^(1/3).

    A Chebyshev bound on | |X|^2/n - 1 | with the quartic moment ratio
    envelope (1 + a)^4 - 1 <= 16 a gives survival <= 16 alpha_4 / eps^2;
    its fixed point with the thin-shell criterion G(eps) <= eps is the cube
    root above.
    """
    if alpha4 < 0:
        raise ValueError("alpha_4 must be nonnegative")
    return (16.0 * alpha4) ** (1.0 / 3.0)


def paley_zygmund_lower(n: int | None, r: float, p: float, s: float,
                        eps: float) -> float:
    """Second-moment lower bound on the upper norm tail.

    Bounds P(|X| >= (1 + eps) m_p) from below by

        [ ((a_p + 1)^p - (1 + eps)^p) / (a_s + 1)^(s p) ]^(1 / (s - p))

    with a_q the moment defect at order q (finite n, or the dimension-free
    limit when n is None).  Requires 2 < p < s < r; the value clamps at
    zero when the numerator goes negative (bound vacuous).
    """
    if not 2 < p < s < r:
        raise ValueError(f"need 2 < p < s < r, got p={p}, s={s}, r={r}")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if n is None:
        a_p = alpha_limit(r, p)
        a_s = alpha_limit(r, s)
    else:
        a_p = alpha_p((n, r), p)
        a_s = alpha_p((n, r), s)
    num = (a_p + 1.0) ** p - (1.0 + eps) ** p
    if num <= 0.0:
        return 0.0
    ratio = num / (a_s + 1.0) ** (s * p)
    return ratio ** (1.0 / (s - p))


def gaussian_cdf(x) -> np.ndarray:
    """Standard normal CDF via the complementary error function."""
    x = np.asarray(x, dtype=float)
    return 0.5 * erfc(-x / math.sqrt(2.0))


def kolmogorov_distance(values, cdf=None, theta=None) -> float:
    """sup-norm distance between the empirical CDF and a reference CDF.

    ``values`` is a 1-D sample, or a point batch together with a unit
    direction ``theta`` to project on.  Default reference is the standard
    Gaussian (projections of isotropic models have mean zero, variance one
    by construction, so no standardization is applied).
    """
    if isinstance(values, SampleBatch):
        if theta is None:
            raise ValueError("projecting a point batch needs a direction")
        theta = np.asarray(theta, dtype=float)
        values = values.points @ theta
    y = np.sort(np.asarray(values, dtype=float))
    if y.ndim != 1 or y.size == 0:
        raise ValueError("need a nonempty 1-D sample")
    ref = gaussian_cdf(y) if cdf is None else np.asarray(cdf(y), dtype=float)
    count = y.size
    grid_hi = np.arange(1, count + 1) / count
    grid_lo = np.arange(0, count) / count
    return float(np.maximum(np.abs(grid_hi - ref), np.abs(ref - grid_lo)).max())


# ---------------------------------------------------------------------------
# calibrated constants


class CalibrationMissing(RuntimeError):
    """Raised when a check needs calibrated constants that were never fit."""


@dataclass
class CalibConstants:
    """Constants fitted once by the ``calibrate`` subcommand.

    theorem_cstar: leading constant of the thin-shell width bound,
    fitted as the smallest constant covering the measured widths on the
    calibration grid (with its grid recorded for the stability re-check).
    beta_root_lo / beta_root_hi: two-sided band of beta_root(x, y) against
    x/(x+y) over the calibration rectangle.  The remaining entries are
    measured envelopes for the rotation log-Lipschitz slope, the reverse
    Holder constant, the moment-body eccentricity comparison, and the
    one-sided body eccentricity growth in q.
    """

    theorem_cstar: float
    theorem_c_pre: float
    beta_root_lo: float
    beta_root_hi: float
    log_lipschitz_c: float
    reverse_holder_c: float
    eccentricity_ratio_c: float
    one_sided_ratio_c: float
    grid: dict = field(default_factory=dict)
    seed: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CalibConstants":
        return cls(**json.loads(text))


def calibration_path() -> Path:
    """Location of the packaged calibration file."""
    return Path(importlib.resources.files("thinshell") / "data" / "calibration.json")


def load_calibration(path=None) -> CalibConstants:
    p = Path(path) if path else calibration_path()
    if not p.exists():
        raise CalibrationMissing(
            f"no calibration at {p}; run the calibrate subcommand first")
    text = p.read_text().strip()
    if not text or text == "{}":
        raise CalibrationMissing(
            f"calibration at {p} is empty; run the calibrate subcommand first")
    return CalibConstants.from_json(text)


def save_calibration(constants: CalibConstants, path=None) -> Path:
    p = Path(path) if path else calibration_path()
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(constants.to_json())
    return p
