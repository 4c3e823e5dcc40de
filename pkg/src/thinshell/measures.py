"""Density models for the convex-measure family and their marginals.

The central object is the isotropic power-law family on R^n with ray
profile ``c1 / (1 + c2*t)**(n+r)``: for each dimension n and tail rank
r > 2 the constants are chosen so the density integrates to one and has
identity covariance.  Affine images and explicit density oracles wrap the
same interface so downstream modules (moments, bodies, rotations) only ever
evaluate log-densities along rays.

Every density here is (-1/alpha)-concave with alpha = n + r, meaning
``density**(-1/alpha)`` is convex; ``check_concavity`` verifies that
structure empirically on random segments, and k-dimensional marginals keep
the same rank r with alpha shrinking to k + r.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import _quad
from .specfun import LogScalar, log_beta, log_sphere_area

__all__ = [
    "RadialProfile",
    "MeasureModel",
    "IsotropyMap",
    "ConcavityReport",
    "make_fnr",
    "make_affine",
    "make_explicit",
    "make_random_convex_density",
    "density",
    "log_density",
    "ray_log_density",
    "marginal_density",
    "marginal_profile",
    "marginal_model",
    "check_concavity",
    "isotropize",
    "model_to_json",
    "model_from_json",
]


@dataclass
class RadialProfile:
    """Radial part of a density: value(t) for t = |x| >= 0.

    kind "power_law" stores log_c1 and c2 for c1*(1+c2*t)**(-alpha);
    kind "tabulated" stores log-values on a grid uniform in asinh(t/scale)
    with monotone cubic interpolation and a declared power tail beyond the
    last knot (never a silent extrapolation of the interpolant).
    """

    kind: str
    alpha: float
    scale: float
    tail_index: float
    log_c1: float = 0.0
    c2: float = 0.0
    xs: np.ndarray | None = None
    log_values: np.ndarray | None = None
    _interp: PchipInterpolator | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in ("power_law", "tabulated"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "tabulated":
            self.xs = np.asarray(self.xs, dtype=float)
            self.log_values = np.asarray(self.log_values, dtype=float)
            if self.xs.ndim != 1 or self.xs.shape != self.log_values.shape:
                raise ValueError("tabulated profile needs matching 1-D grids")
            if self.xs[0] != 0.0:
                raise ValueError("tabulated grid must start at t = 0")

    def log_value(self, t):
        """Vectorized log of the profile at radii t >= 0."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        if (t < 0).any():
            raise ValueError("radii must be nonnegative")
        if self.kind == "power_law":
            out = self.log_c1 - self.alpha * np.log1p(self.c2 * t)
        else:
            if self._interp is None:
                self._interp = PchipInterpolator(self.xs, self.log_values,
                                                 extrapolate=False)
            x = np.arcsinh(t / self.scale)
            out = np.empty_like(t)
            inside = x <= self.xs[-1]
            out[inside] = self._interp(x[inside])
            if (~inside).any():
                # Declared power-law continuation beyond the last knot.
                t_max = self.scale * math.sinh(self.xs[-1])
                out[~inside] = (self.log_values[-1]
                                - self.tail_index * (np.log(t[~inside])
                                                     - math.log(t_max)))
        return out[0] if scalar else out


@dataclass
class MeasureModel:
    """A probability density on R^n from the (-1/(n+r))-concave class.

    kind "radial": rotation invariant with the given profile.
    kind "affine_radial": image A X + shift of a radial base.
    kind "explicit": vectorized log-density oracle (not serializable,
    not samplable).
    """

    kind: str
    n: int
    r: float
    profile: RadialProfile | None = None
    base: "MeasureModel | None" = None
    map: np.ndarray | None = None
    shift: np.ndarray | None = None
    log_density_fn: object = None
    isotropic: bool = False
    scale_hint: float = 1.0
    name: str = ""
    _map_inv: np.ndarray | None = field(default=None, repr=False)
    _log_abs_det: float = field(default=0.0, repr=False)
    _marginal_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.kind not in ("radial", "affine_radial", "explicit"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.kind == "radial" and self.profile is None:
            raise ValueError("radial model needs a profile")
        if self.kind == "affine_radial":
            if self.base is None or self.base.kind != "radial":
                raise ValueError("affine_radial needs a radial base model")
            self.map = np.asarray(self.map, dtype=float)
            if self.map.shape != (self.n, self.n):
                raise ValueError("map must be n x n")
            if self.shift is None:
                self.shift = np.zeros(self.n)
            self.shift = np.asarray(self.shift, dtype=float)
            sign, logdet = np.linalg.slogdet(self.map)
            if sign == 0:
                raise ValueError("affine map must be invertible")
            self._map_inv = np.linalg.inv(self.map)
            self._log_abs_det = float(logdet)
        if self.kind == "explicit" and self.log_density_fn is None:
            raise ValueError("explicit model needs a log-density callable")

    @property
    def alpha(self) -> float:
        """Concavity exponent: density**(-1/alpha) is convex."""
        return self.n + self.r

    @property
    def scale(self) -> float:
        if self.kind == "radial":
            return self.profile.scale
        if self.kind == "affine_radial":
            smax = float(np.linalg.norm(self.map, 2))
            return self.base.scale * smax
        return self.scale_hint


@dataclass
class IsotropyMap:
    """Affine change of variables M(x - mu) that makes a model isotropic."""

    linear: np.ndarray
    shift: np.ndarray
    condition: float

    def apply(self, points: np.ndarray) -> np.ndarray:
        return (points - self.shift) @ self.linear.T


@dataclass
class ConcavityReport:
    alpha: float
    trials: int
    max_violation: float
    violations: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def make_fnr(n: int, r: float) -> MeasureModel:
    """The isotropic power-law model on R^n with tail rank r > 2."""
    n = int(n)
    r = float(r)
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    if r <= 2.0:
        raise ValueError(f"tail rank must exceed 2 for finite covariance, got {r}")
    c2 = math.sqrt((n + 1.0) / ((r - 1.0) * (r - 2.0)))
    log_c1 = n * math.log(c2) - log_sphere_area(n) - log_beta(n, r)
    profile = RadialProfile(kind="power_law", alpha=n + r, scale=1.0 / c2,
                            tail_index=n + r, log_c1=log_c1, c2=c2)
    return MeasureModel(kind="radial", n=n, r=r, profile=profile,
                        isotropic=True, name=f"fnr(n={n},r={r:g})")


def make_affine(base: MeasureModel, linear, shift=None) -> MeasureModel:
    """Affine image A X + shift of a radial base model."""
    if base.kind != "radial":
        raise ValueError("affine images are built over radial bases")
    linear = np.asarray(linear, dtype=float)
    return MeasureModel(kind="affine_radial", n=base.n, r=base.r, base=base,
                        map=linear, shift=shift,
                        name=f"affine({base.name})")


def make_explicit(n: int, r: float, log_density_fn, scale_hint=1.0,
                  name="explicit") -> MeasureModel:
    """Wrap a vectorized log-density oracle (rows of shape (m, n))."""
    return MeasureModel(kind="explicit", n=int(n), r=float(r),
                        log_density_fn=log_density_fn,
                        scale_hint=float(scale_hint), name=name)


def log_density(model: MeasureModel, points: np.ndarray) -> np.ndarray:
    """Vectorized log-density at rows of ``points`` (shape (m, n) or (n,))."""
    pts = np.asarray(points, dtype=float)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if pts.shape[1] != model.n:
        raise ValueError(f"points have dimension {pts.shape[1]}, model has {model.n}")
    if model.kind == "radial":
        out = model.profile.log_value(np.linalg.norm(pts, axis=1))
    elif model.kind == "affine_radial":
        y = (pts - model.shift) @ model._map_inv.T
        out = (model.base.profile.log_value(np.linalg.norm(y, axis=1))
               - model._log_abs_det)
    else:
        out = np.asarray(model.log_density_fn(pts), dtype=float)
    return out[0] if single else out


def density(model: MeasureModel, point) -> LogScalar:
    """Density at one point, as a LogScalar."""
    return LogScalar.from_log(float(log_density(model, point)))


def ray_log_density(model: MeasureModel, theta, origin=None):
    """Return (callable, tail_index, scale) for t -> log density(origin + t*theta).

    theta is normalized internally; t is a nonnegative array.
    """
    theta = np.asarray(theta, dtype=float)
    nrm = np.linalg.norm(theta)
    if nrm == 0:
        raise ValueError("direction must be nonzero")
    theta = theta / nrm
    if origin is None:
        origin = np.zeros(model.n)
    origin = np.asarray(origin, dtype=float)

    if model.kind == "radial" and not origin.any():
        prof = model.profile
        return (lambda t: prof.log_value(np.asarray(t, dtype=float)),
                prof.tail_index, prof.scale)

    if model.kind == "radial":
        prof = model.profile
        a2 = 1.0
        ab = float(origin @ theta)
        b2 = float(origin @ origin)
        def f(t):
            t = np.asarray(t, dtype=float)
            rad = np.sqrt(np.maximum(t * t * a2 + 2.0 * t * ab + b2, 0.0))
            return prof.log_value(rad)
        # Along an offset ray the knee sits near |origin| + scale.
        return f, prof.tail_index, prof.scale + math.sqrt(b2)

    if model.kind == "affine_radial":
        prof = model.base.profile
        u = model._map_inv @ theta
        b = model._map_inv @ (origin - model.shift)
        a2 = float(u @ u)
        ab = float(u @ b)
        b2 = float(b @ b)
        logdet = model._log_abs_det
        def f(t):
            t = np.asarray(t, dtype=float)
            rad = np.sqrt(np.maximum(t * t * a2 + 2.0 * t * ab + b2, 0.0))
            return prof.log_value(rad) - logdet
        return f, prof.tail_index, (prof.scale + math.sqrt(b2)) / math.sqrt(a2)

    fn = model.log_density_fn
    def f(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.asarray(fn(origin[None, :] + t[:, None] * theta[None, :]),
                          dtype=float)
    return f, model.alpha, model.scale_hint


def _log_marginal_at(model: MeasureModel, k: int, t: float,
                     epsrel: float = 1e-11) -> float:
    """log of the k-dimensional marginal's radial profile at radius t."""
    prof = model.profile
    n = model.n
    tt = float(t)
    def log_f(s):
        s = np.asarray(s, dtype=float)
        return prof.log_value(np.hypot(tt, s))
    # At offset t the fiber integrand bends at s ~ hypot(scale, t), not at
    # the profile scale itself; the piece split must follow that knee.
    val = _quad.log_power_moment(log_f, n - k, tail_index=prof.tail_index,
                                 scale=math.hypot(prof.scale, tt),
                                 epsrel=epsrel)
    return val + log_sphere_area(n - k)


def marginal_density(model: MeasureModel, k: int, y) -> LogScalar:
    """Density of the k-dimensional marginal of a radial model at point y."""
    if model.kind != "radial":
        raise ValueError("marginal_density expects a radial model")
    k = int(k)
    if not 1 <= k <= model.n:
        raise ValueError(f"marginal dimension must be in [1, {model.n}], got {k}")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != (k,):
        raise ValueError(f"point must have dimension {k}")
    t = float(np.linalg.norm(y))
    if k == model.n:
        return LogScalar.from_log(float(model.profile.log_value(t)))
    return LogScalar.from_log(_log_marginal_at(model, k, t))


def marginal_profile(model: MeasureModel, k: int, grid_size: int = 801,
                     span: float = 1e5) -> RadialProfile:
    """Tabulate the radial profile of the k-marginal of a radial model.

    The marginal of a model with rank r keeps rank r in dimension k, so the
    tabulated profile carries alpha = k + r and the same power tail index.
    """
    if model.kind != "radial":
        raise ValueError("marginal_profile expects a radial model")
    k = int(k)
    if not 1 <= k < model.n:
        raise ValueError(f"marginal dimension must be in [1, {model.n}), got {k}")
    key = (k, grid_size, span)
    cached = model._marginal_cache.get(key)
    if cached is not None:
        return cached
    scale = model.profile.scale
    xs = np.linspace(0.0, math.asinh(span), grid_size)
    ts = scale * np.sinh(xs)
    logs = np.array([_log_marginal_at(model, k, t) for t in ts])
    draft = RadialProfile(kind="tabulated", alpha=k + model.r, scale=scale,
                          tail_index=k + model.r, xs=xs, log_values=logs)
    # The interpolant must integrate to exactly 1 as a density on R^k, or
    # identities relating normalized and unnormalized moments pick up the
    # interpolation bias; renormalize by its own numerical mass.
    log_mass = log_sphere_area(k) + _quad.log_power_moment(
        draft.log_value, float(k), tail_index=draft.tail_index, scale=scale)
    prof = RadialProfile(kind="tabulated", alpha=k + model.r, scale=scale,
                         tail_index=k + model.r, xs=xs,
                         log_values=logs - log_mass)
    model._marginal_cache[key] = prof
    return prof


def marginal_model(model: MeasureModel, k: int, **kw) -> MeasureModel:
    """The k-marginal of a radial model, as a radial model on R^k."""
    prof = marginal_profile(model, k, **kw)
    return MeasureModel(kind="radial", n=k, r=model.r, profile=prof,
                        isotropic=model.isotropic,
                        name=f"marginal(k={k},{model.name})")


def check_concavity(target, alpha: float, trials: int = 1000, rng=None,
                    point_scale: float = None, tol: float = 1e-9) -> ConcavityReport:
    """Midpoint-convexity test of density**(-1/alpha) on random segments.

    ``target`` is a MeasureModel (segments drawn in R^n) or a RadialProfile
    (segments on the half-line).  Violations are normalized by the local
    value scale; a positive max_violation above tol means the density is not
    (-1/alpha)-concave on the sampled region.
    """
    alpha = float(alpha)
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if rng is None:
        rng = np.random.default_rng(0)
    elif hasattr(rng, "generator"):
        rng = rng.generator()

    if isinstance(target, RadialProfile):
        scale = point_scale if point_scale else 4.0 * target.scale
        x = np.abs(rng.normal(0.0, scale, size=(trials, 1)))
        y = np.abs(rng.normal(0.0, scale, size=(trials, 1)))
        def log_w(pts):
            return target.log_value(np.abs(pts[:, 0]))
    elif isinstance(target, MeasureModel):
        scale = point_scale if point_scale else 2.0 * target.scale * math.sqrt(target.n)
        x = rng.normal(0.0, scale / math.sqrt(target.n), size=(trials, target.n))
        y = rng.normal(0.0, scale / math.sqrt(target.n), size=(trials, target.n))
        def log_w(pts):
            return log_density(target, pts)
    else:
        raise TypeError("target must be a MeasureModel or RadialProfile")

    mid = 0.5 * (x + y)
    # phi = w**(-1/alpha) must be midpoint convex.
    phi_x = np.exp(-log_w(x) / alpha)
    phi_y = np.exp(-log_w(y) / alpha)
    phi_m = np.exp(-log_w(mid) / alpha)
    scale_loc = np.maximum(np.maximum(phi_x, phi_y), 1e-300)
    viol = (phi_m - 0.5 * (phi_x + phi_y)) / scale_loc
    return ConcavityReport(alpha=alpha, trials=trials,
                           max_violation=float(viol.max()),
                           violations=int((viol > tol).sum()), tol=tol)


def _inv_sqrt_psd(mat: np.ndarray):
    vals, vecs = np.linalg.eigh(mat)
    if vals.min() <= 0:
        raise RuntimeError("covariance is not positive definite")
    inv_sqrt = (vecs * (1.0 / np.sqrt(vals))) @ vecs.T
    condition = math.sqrt(float(vals.max() / vals.min()))
    return inv_sqrt, condition


def isotropize(model: MeasureModel, batch=None) -> IsotropyMap:
    """Affine map sending the model to mean zero, identity covariance.

    Radial models are handled in closed form; affine images through their
    map; explicit models need a SampleBatch for moment estimation and raise
    otherwise.
    """
    n = model.n
    if model.kind == "radial":
        if model.isotropic:
            return IsotropyMap(np.eye(n), np.zeros(n), 1.0)
        # second moment of the profile: E|X|^2 = Int t^{n+1} w / Int t^{n-1} w
        prof = model.profile
        log_m2 = _quad.log_power_moment(prof.log_value, n + 2,
                                        tail_index=prof.tail_index,
                                        scale=prof.scale)
        log_m0 = _quad.log_power_moment(prof.log_value, n,
                                        tail_index=prof.tail_index,
                                        scale=prof.scale)
        sigma = math.exp(0.5 * (log_m2 - log_m0)) / math.sqrt(n)
        return IsotropyMap(np.eye(n) / sigma, np.zeros(n), 1.0)
    if model.kind == "affine_radial":
        base_map = isotropize(model.base)
        sigma = 1.0 / base_map.linear[0, 0]
        cov = (model.map @ model.map.T) * sigma * sigma
        inv_sqrt, condition = _inv_sqrt_psd(cov)
        return IsotropyMap(inv_sqrt, model.shift.copy(), condition)
    if batch is None:
        raise RuntimeError(
            "explicit models need a sample batch for covariance estimation"
        )
    pts = batch.points if hasattr(batch, "points") else np.asarray(batch)
    mean = pts.mean(axis=0)
    cov = np.cov(pts, rowvar=False)
    inv_sqrt, condition = _inv_sqrt_psd(np.atleast_2d(cov))
    return IsotropyMap(inv_sqrt, mean, condition)


def model_to_json(model: MeasureModel) -> str:
    """Serialize a model descriptor to JSON (bit-exact float round-trip)."""
    return json.dumps(_model_dict(model))


def _model_dict(model: MeasureModel) -> dict:
    if model.kind == "radial":
        prof = model.profile
        if prof.kind == "power_law" and model.name.startswith("fnr("):
            return {"kind": "fnr", "n": model.n, "r": model.r}
        if prof.kind == "power_law":
            return {"kind": "radial_power", "n": model.n, "r": model.r,
                    "log_c1": prof.log_c1, "c2": prof.c2, "alpha": prof.alpha}
        return {"kind": "radial_tabulated", "n": model.n, "r": model.r,
                "scale": prof.scale, "alpha": prof.alpha,
                "tail_index": prof.tail_index,
                "xs": prof.xs.tolist(), "log_values": prof.log_values.tolist()}
    if model.kind == "affine_radial":
        return {"kind": "affine", "base": _model_dict(model.base),
                "map": model.map.tolist(), "shift": model.shift.tolist()}
    raise ValueError("explicit models are not serializable")


def model_from_json(text) -> MeasureModel:
    data = json.loads(text) if isinstance(text, str) else text
    return _model_from_dict(data)


def _model_from_dict(data: dict) -> MeasureModel:
    kind = data["kind"]
    if kind == "fnr":
        return make_fnr(data["n"], data["r"])
    if kind == "radial_power":
        prof = RadialProfile(kind="power_law", alpha=data["alpha"],
                             scale=1.0 / data["c2"], tail_index=data["alpha"],
                             log_c1=data["log_c1"], c2=data["c2"])
        return MeasureModel(kind="radial", n=data["n"], r=data["r"],
                            profile=prof)
    if kind == "radial_tabulated":
        prof = RadialProfile(kind="tabulated", alpha=data["alpha"],
                             scale=data["scale"], tail_index=data["tail_index"],
                             xs=np.array(data["xs"]),
                             log_values=np.array(data["log_values"]))
        return MeasureModel(kind="radial", n=data["n"], r=data["r"],
                            profile=prof)
    if kind == "affine":
        base = _model_from_dict(data["base"])
        return make_affine(base, np.array(data["map"]), np.array(data["shift"]))
    raise ValueError(f"unknown model kind {kind!r}")


def make_random_convex_density(dim: int, r: float, rng, planes: int = 3,
                               slope_scale: float = 0.6) -> MeasureModel:
    """Random density phi(x)**-(dim+r) with phi piecewise affine convex.

    phi is a max of affine functions anchored so phi >= 1 everywhere; the
    result is recentered so its barycenter sits at the origin, normalized to
    unit mass, and wrapped as an explicit model of rank r on R^dim.
    """
    if dim not in (1, 2):
        raise ValueError("random convex densities support dim 1 or 2 only")
    if hasattr(rng, "generator"):
        rng = rng.generator()
    alpha = dim + float(r)
    # Anchor slopes +-s on each axis keep the max >= 1 everywhere.
    anchors = []
    for j in range(dim):
        s = rng.uniform(0.3, 1.0)
        e = np.zeros(dim)
        e[j] = 1.0
        anchors.append((1.0, s * e))
        anchors.append((1.0, -rng.uniform(0.3, 1.0) * e))
    extras = [(rng.uniform(0.8, 1.6),
               rng.normal(0.0, slope_scale, size=dim)) for _ in range(planes)]
    offs = np.array([a for a, _ in anchors + extras])
    slopes = np.stack([b for _, b in anchors + extras])

    def log_phi(pts):
        vals = offs[None, :] + pts @ slopes.T
        return np.log(vals.max(axis=1))

    def log_g0(pts):
        return -alpha * log_phi(np.atleast_2d(np.asarray(pts, dtype=float)))

    # Mass and barycenter by ray quadrature (dim <= 2).
    scale = 1.0 / slope_scale
    if dim == 1:
        logs = {}
        for sgn in (1.0, -1.0):
            f = lambda t, s=sgn: log_g0(np.atleast_1d(t)[:, None] * s)
            logs[sgn, 0] = _quad.log_power_moment(f, 1.0, tail_index=alpha,
                                                  scale=scale)
            logs[sgn, 1] = _quad.log_power_moment(f, 2.0, tail_index=alpha,
                                                  scale=scale)
        log_mass = np.logaddexp(logs[1.0, 0], logs[-1.0, 0])
        bary = np.array([math.exp(logs[1.0, 1] - log_mass)
                         - math.exp(logs[-1.0, 1] - log_mass)])
    else:
        angles = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
        us = np.stack([np.cos(angles), np.sin(angles)], axis=1)
        m0 = np.empty(len(us))
        m1 = np.empty(len(us))
        for i, u in enumerate(us):
            f = lambda t, uu=u: log_g0(np.atleast_1d(t)[:, None] * uu[None, :])
            m0[i] = _quad.log_power_moment(f, 2.0, tail_index=alpha, scale=scale)
            m1[i] = _quad.log_power_moment(f, 3.0, tail_index=alpha, scale=scale)
        dphi = 2.0 * math.pi / len(us)
        log_mass = math.log(np.exp(m0 - m0.max()).sum() * dphi) + m0.max()
        w1 = np.exp(m1 - log_mass)
        bary = (us * w1[:, None]).sum(axis=0) * dphi

    def log_density_fn(pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return log_g0(pts + bary[None, :]) - log_mass

    return make_explicit(dim, r, log_density_fn, scale_hint=scale,
                         name=f"convex_poly(dim={dim},r={r:g})")
