"""Moment transforms whose log-concavity encodes measure concavity.

For a profile f on [0, inf) with power tail t^-alpha, the normalized
Mellin-type transform

    H_f(p) = (1 / B(p, alpha - p)) * Int t^(p-1) f(t) dt,   H_f(0) = f(0)

is log-concave in p exactly when f is (-1/alpha)-concave, and is exactly
geometric (log-linear) for the pure power profile.  Compactly supported
profiles with f^(1/m) concave get the analogous transform normalized by
B(q, m + 1), log-concave with the m-affine profile (1 - t/T)^m as the
geometric extremal.

The one-dimensional Khinchine-type comparison lives here too: ratios of
one-sided projection moments of an isotropic model are bounded by the
closed-form ratio of the extremal rank-r law on the half-line, which
attains the bound exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _quad
from .measures import MeasureModel, RadialProfile, marginal_profile
from .sampling import RngStream, sample_projection
from .specfun import log_beta, log_gamma, log_half_direction_moment

__all__ = [
    "HProfile",
    "LogConcavityReport",
    "KhinchineReport",
    "h_transform",
    "g_transform",
    "logconcavity_test",
    "two_scale_profile",
    "positive_moment",
    "khinchine_rhs",
    "khinchine_extremal_gap",
    "khinchine_check",
    "khinchine_logconcavity",
]


@dataclass
class HProfile:
    """A transform evaluated on a uniform grid of orders, in log space."""

    ps: np.ndarray
    log_values: np.ndarray
    alpha: float


@dataclass
class LogConcavityReport:
    """Second-difference test of log-concavity on a uniform grid.

    max_violation is the largest positive second difference normalized by
    the local magnitude of the log-values; negative means strictly concave
    on the grid.
    """

    max_violation: float
    argmax: int
    step: float
    count: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def _as_log_callable(f, alpha, scale):
    if isinstance(f, RadialProfile):
        return f.log_value, f.alpha, f.scale
    if alpha is None:
        raise ValueError("callable profiles need an explicit tail exponent alpha")
    return f, float(alpha), float(scale)


def h_transform(f, ps, alpha: float | None = None, scale: float = 1.0,
                epsrel: float = 1e-11) -> HProfile:
    """Normalized power-moment transform of a heavy-tailed profile.

    ``f`` is a RadialProfile or a vectorized log-density callable with
    declared tail exponent alpha; orders must satisfy 0 <= p < alpha, and
    p = 0 is filled with log f(0).
    """
    log_f, alpha, scale = _as_log_callable(f, alpha, scale)
    ps = np.asarray(ps, dtype=float)

    def at(p):
        raw = _quad.log_power_moment(log_f, p, tail_index=alpha,
                                     scale=scale, epsrel=epsrel)
        return raw - log_beta(p, alpha - p)

    out = np.empty_like(ps)
    for i, p in enumerate(ps):
        if p < 0 or p >= alpha:
            raise ValueError(f"orders must lie in [0, {alpha}), got {p}")
        if p == 0.0:
            log_f0 = float(log_f(np.array([0.0]))[0])
            # continuity guard: the transform must approach f(0) as the
            # order vanishes; a gap signals a mistaken tail exponent
            drift = abs(at(1e-4 * alpha) - log_f0)
            if drift > 0.05:
                raise _quad.QuadratureError(
                    f"transform does not continue to f(0): gap {drift:.2e} "
                    "in log; check the declared tail exponent")
            out[i] = log_f0
        else:
            out[i] = at(float(p))
    return HProfile(ps=ps, log_values=out, alpha=alpha)


def g_transform(f, qs, m: float, upper: float = 1.0, scale: float | None = None,
                epsrel: float = 1e-11) -> HProfile:
    """Normalized moment transform of a compactly supported profile.

    G_f(q) = Int_0^upper t^(q-1) f(t) dt / B(q, m + 1); exactly constant in
    q when f is the m-affine profile c (1 - t/upper)^m, and log-concave for
    every f with f^(1/m) concave on [0, upper].
    """
    if m < 0:
        raise ValueError("concavity degree m must be nonnegative")
    qs = np.asarray(qs, dtype=float)
    if (qs <= 0).any():
        raise ValueError("orders must be positive")
    scale = upper if scale is None else scale
    out = np.empty_like(qs)
    for i, q in enumerate(qs):
        raw = _quad.log_power_moment(f, float(q), upper=upper, scale=scale,
                                     epsrel=epsrel)
        out[i] = raw - log_beta(float(q), m + 1.0) - float(q) * math.log(upper)
    return HProfile(ps=qs, log_values=out, alpha=m)


def logconcavity_test(ps, log_values, tol: float = 1e-6) -> LogConcavityReport:
    """Check log-concavity by second differences on a uniform grid."""
    ps = np.asarray(ps, dtype=float)
    vals = np.asarray(log_values, dtype=float)
    if ps.size < 3:
        raise ValueError("need at least three grid points")
    steps = np.diff(ps)
    step = float(steps[0])
    if step <= 0 or np.abs(steps - step).max() > 1e-9 * max(abs(step), 1.0):
        raise ValueError("order grid must be uniform and increasing")
    d2 = vals[:-2] - 2.0 * vals[1:-1] + vals[2:]
    local = np.maximum(np.abs(vals[1:-1]), 1.0)
    rel = d2 / local
    arg = int(np.argmax(rel))
    return LogConcavityReport(max_violation=float(rel[arg]), argmax=arg + 1,
                              step=step, count=ps.size, tol=tol)


def two_scale_profile(alpha: float, weight: float = 0.05, ratio: float = 50.0):
    """Mixture of two power profiles: a log-CONVEX transform witness.

    Each piece is (-1/alpha)-concave but the mixture is not, and its
    transform is exactly 1 + weight * ratio**p — strictly log-convex.  The
    returned callable is a vectorized log-density; pair it with the closed
    form to validate violation detection end to end.
    """
    if alpha <= 0 or weight <= 0 or ratio <= 1:
        raise ValueError("need alpha > 0, weight > 0, ratio > 1")
    la, lw, lr = float(alpha), float(weight), float(ratio)

    def log_f(t):
        t = np.asarray(t, dtype=float)
        a = -la * np.log1p(t)
        b = math.log(lw) - la * np.log1p(t / lr)
        return np.logaddexp(a, b)

    return log_f


def positive_moment(model: MeasureModel, s: float, theta=None,
                    mc_size: int = 0, rng=None) -> float:
    """(E <X, theta>_+^s)^(1/s) for a centered model, s in (0, r).

    Rotation-invariant models factor into the radial moment times a
    closed-form directional constant (theta is irrelevant and may be None).
    Affine images and explicit models estimate by Monte Carlo projection
    (mc_size draws of <X, theta> with the positive part kept).
    """
    s = float(s)
    if not 0.0 < s < model.r:
        raise ValueError(f"order must lie in (0, {model.r}), got {s}")
    if model.kind == "radial":
        prof = model.profile
        log_norm = _quad.log_power_moment(prof.log_value, float(model.n),
                                          tail_index=prof.tail_index,
                                          scale=prof.scale)
        log_mom = _quad.log_power_moment(prof.log_value, model.n + s,
                                         tail_index=prof.tail_index,
                                         scale=prof.scale)
        log_radial = log_mom - log_norm
        return math.exp((log_radial + log_half_direction_moment(model.n, s)) / s)
    return _mc_positive_moment(model, s, theta, mc_size, rng)[0]


def khinchine_logconcavity(model: MeasureModel, grid_size: int = 41,
                           margin: float = 0.05) -> LogConcavityReport:
    """Grid log-concavity of p -> (1/(p B(p, r-p))) E <X, theta>_+^p.

    Closed form for rotation-invariant models; the grid spans (0, r) with a
    relative margin trimmed at both ends.
    """
    if model.kind != "radial":
        raise ValueError("the log-concavity grid needs a radial model")
    r = model.r
    ps = np.linspace(margin * r, (1.0 - margin) * r, grid_size)
    prof = model.profile
    log_norm = _quad.log_power_moment(prof.log_value, float(model.n),
                                      tail_index=prof.tail_index,
                                      scale=prof.scale)
    vals = np.empty_like(ps)
    for i, p in enumerate(ps):
        log_mom = _quad.log_power_moment(prof.log_value, model.n + float(p),
                                         tail_index=prof.tail_index,
                                         scale=prof.scale)
        vals[i] = (log_mom - log_norm
                   + log_half_direction_moment(model.n, float(p))
                   - math.log(p) - log_beta(float(p), r - float(p)))
    return logconcavity_test(ps, vals)


def khinchine_rhs(r: float, p: float, q: float) -> float:
    """Extremal moment-ratio bound (q B(q, r-q))^(1/q) / (p B(p, r-p))^(1/p)."""
    r, p, q = float(r), float(p), float(q)
    if not 0 < p <= q < r:
        raise ValueError(f"need 0 < p <= q < r, got p={p}, q={q}, r={r}")
    lq = (math.log(q) + log_beta(q, r - q)) / q
    lp = (math.log(p) + log_beta(p, r - p)) / p
    return math.exp(lq - lp)


def khinchine_extremal_gap(r: float, p: float, q: float) -> float:
    """|ratio/bound - 1| for the extremal half-line law of rank r.

    The law with density r (1 + t)^-(1+r) on the half-line attains the
    bound; its moments are integrated numerically here rather than reusing
    the bound's own Beta algebra, so the comparison is a real cross-check
    and the gap measures quadrature error only.
    """
    r, p, q = float(r), float(p), float(q)
    if not 0.0 < p <= q < r:
        raise ValueError(f"need 0 < p <= q < r, got p={p}, q={q}, r={r}")

    def log_witness(t):
        return -(1.0 + r) * np.log1p(np.asarray(t, dtype=float))

    # E t^s = r * int t^s (1+t)^-(1+r) dt, integrated adaptively
    lq = (math.log(r) + _quad.log_power_moment(log_witness, q + 1.0,
                                               tail_index=1.0 + r)) / q
    lp = (math.log(r) + _quad.log_power_moment(log_witness, p + 1.0,
                                               tail_index=1.0 + r)) / p
    ratio = math.exp(lq - lp)
    return abs(ratio / khinchine_rhs(r, p, q) - 1.0)


@dataclass
class KhinchineReport:
    """One-sided moment ratio of a model against the extremal-law bound.

    rhs is the sharp constant: the extremal half-line ratio scaled by
    support_mass**(1/q - 1/p), where support_mass is the probability the
    functional is positive.  For an even measure and a linear functional
    that mass is one half, and the scaled bound is attained with equality
    by the symmetric one-dimensional power law; a functional positive
    almost everywhere has mass one, where the scaling disappears and
    rhs == rhs_full_support.  se is the Monte-Carlo standard error of lhs
    (zero on closed-form routes).
    """

    lhs: float
    rhs: float
    rhs_full_support: float
    support_mass: float
    p: float
    q: float
    method: str
    se: float = 0.0
    transform_gap: float | None = None

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs

    @property
    def holds(self) -> bool:
        # the 1e-12 relative slack absorbs rounding in the exact-equality
        # case (symmetric one-dimensional laws sit exactly on the bound)
        return self.lhs <= self.rhs * (1.0 + 1e-12) + 3.0 * self.se


def khinchine_check(model: MeasureModel, p: float, q: float, theta=None,
                    mc_size: int = 0, rng=None,
                    transform_route: bool = False) -> KhinchineReport:
    """Compare one-sided projection moment ratios against the extremal bound.

    lhs = m_q^+ / m_p^+ for the model; rhs the closed-form rank-r bound with
    its support-mass scaling (see KhinchineReport).  With
    transform_route=True (radial models), the q-side moment is recomputed
    through the marginal-profile transform as an independent route, and the
    relative gap between the two routes is reported.
    """
    if not 0 < p <= q < model.r:
        raise ValueError(f"need 0 < p <= q < rank, got p={p}, q={q}, r={model.r}")
    se = 0.0
    if model.kind == "radial":
        lhs = (positive_moment(model, q) / positive_moment(model, p))
        method = "closed_form"
    else:
        num, se_num = _mc_positive_moment(model, q, theta, mc_size, rng)
        den, se_den = _mc_positive_moment(model, p, theta, mc_size, rng)
        lhs = num / den
        se = lhs * math.hypot(se_num / num, se_den / den)
        method = "mc"
    # a centered radial or affine-radial law is even, so a linear
    # functional is positive with probability one half
    mass = 0.5
    gap = None
    if transform_route:
        if model.kind != "radial":
            raise ValueError("the transform route needs a radial model")
        gap = _transform_route_gap(model, q)
    rhs_full = khinchine_rhs(model.r, p, q)
    rhs = rhs_full * mass ** (1.0 / q - 1.0 / p)
    return KhinchineReport(lhs=lhs, rhs=rhs, rhs_full_support=rhs_full,
                           support_mass=mass, p=p, q=q, method=method, se=se,
                           transform_gap=gap)


def _mc_positive_moment(model, s, theta, mc_size, rng):
    """MC estimate of (E <X,theta>_+^s)^(1/s) with its delta-method error."""
    if theta is None or mc_size <= 0 or rng is None:
        raise ValueError("non-radial models need theta, mc_size and rng")
    if model.kind == "affine_radial" and model.shift.any():
        raise ValueError("one-sided moment comparison expects a centered model")
    y = np.maximum(sample_projection(model, theta, mc_size, rng), 0.0) ** s
    mean = float(y.mean())
    se_mean = float(y.std(ddof=1)) / math.sqrt(mc_size)
    value = mean ** (1.0 / s)
    return value, value / (s * mean) * se_mean


def _transform_route_gap(model: MeasureModel, q: float) -> float:
    """Relative gap between the direct and transform routes for m_q^+.

    E <X, u>_+^q equals H(q + 1) B(q + 1, r - q) for the transform H of the
    one-dimensional marginal profile (tail exponent r + 1).
    """
    prof = marginal_profile(model, 1) if model.n > 1 else model.profile
    hp = h_transform(prof, np.array([q + 1.0]))
    log_lhs = hp.log_values[0] + log_beta(q + 1.0, model.r - q)
    direct = positive_moment(model, q)
    return abs(math.exp(log_lhs / q) / direct - 1.0)
