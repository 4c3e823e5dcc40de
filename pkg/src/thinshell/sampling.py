"""Reproducible sampling for the power-law family and its affine images.

All randomness flows through counter-based Philox generators keyed by an
explicit (seed, stream) pair, so any figure or table cell can be regenerated
in isolation.  Radii of the power-law family follow an exact Beta law
(u = c2 t / (1 + c2 t) is Beta(n, r)), which gives both a fast exact sampler
and a memory-safe radius-only path for very large dimensions.

Sample batches persist as raw little-endian float64 alongside a JSON sidecar
describing shape, provenance, and the generating model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _quad
from .measures import MeasureModel, model_from_json, _model_dict

__all__ = [
    "RngStream",
    "SampleBatch",
    "sample_sphere",
    "sample_beta",
    "sample_fnr_radii",
    "sample_fnr",
    "sample_model",
    "sample_projection",
    "haar_rotation",
    "MAX_BATCH_BYTES",
]

MAX_BATCH_BYTES = 2 << 30  # refuse full-coordinate batches above 2 GiB


@dataclass(frozen=True)
class RngStream:
    """Philox key (seed, stream): independent generators per purpose."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed % (1 << 64), self.stream % (1 << 64)],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, k: int) -> "RngStream":
        """Derived stream; distinct children never collide in practice."""
        return RngStream(self.seed, (self.stream * 1000003 + k + 1) % (1 << 64))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("rng must be an RngStream or numpy Generator")


@dataclass
class SampleBatch:
    """Points (rows) or radii (1-D) drawn from a model, with provenance.

    kind "points": data has shape (N, n).  kind "radii": data has shape (N,)
    and ``n`` records the ambient dimension the radii refer to.
    """

    data: np.ndarray
    n: int
    kind: str = "points"
    model: dict | None = None
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.kind not in ("points", "radii"):
            raise ValueError(f"unknown batch kind {self.kind!r}")
        want = 2 if self.kind == "points" else 1
        if self.data.ndim != want:
            raise ValueError(f"{self.kind} batch must be {want}-D")
        if self.kind == "points" and self.data.shape[1] != self.n:
            raise ValueError("points batch width disagrees with n")

    @property
    def size(self) -> int:
        return self.data.shape[0]

    @property
    def points(self) -> np.ndarray:
        if self.kind != "points":
            raise ValueError("radii batch has no coordinate points")
        return self.data

    @property
    def radii(self) -> np.ndarray:
        if self.kind == "radii":
            return self.data
        return np.linalg.norm(self.data, axis=1)

    def save(self, prefix) -> None:
        """Write <prefix>.f64 (raw little-endian, C order) and <prefix>.json."""
        prefix = Path(prefix)
        meta = {
            "kind": self.kind,
            "shape": list(self.data.shape),
            "dtype": "<f8",
            "order": "C",
            "n": self.n,
            "seed": self.seed,
            "stream": self.stream,
            "model": self.model,
        }
        raw = np.ascontiguousarray(self.data.astype("<f8", copy=False))
        raw.tofile(prefix.with_suffix(".f64"))
        prefix.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")

    @classmethod
    def load(cls, prefix) -> "SampleBatch":
        prefix = Path(prefix)
        meta = json.loads(prefix.with_suffix(".json").read_text())
        if meta["dtype"] != "<f8" or meta.get("order", "C") != "C":
            raise ValueError("unsupported batch encoding")
        data = np.fromfile(prefix.with_suffix(".f64"), dtype="<f8")
        data = data.reshape(meta["shape"]).astype(np.float64)
        return cls(data=data, n=meta["n"], kind=meta["kind"],
                   model=meta.get("model"), seed=meta.get("seed", 0),
                   stream=meta.get("stream", 0))

    def to_model(self) -> MeasureModel | None:
        return model_from_json(self.model) if self.model else None


def sample_sphere(n: int, size: int, rng) -> np.ndarray:
    """Uniform directions on the unit sphere of R^n, shape (size, n)."""
    gen = _as_generator(rng)
    g = gen.standard_normal((size, n))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    np.maximum(norms, 1e-300, out=norms)
    return g / norms


def sample_beta(a: float, b: float, size, rng) -> np.ndarray:
    """Beta(a, b) variates on (0, 1) from a deterministic stream."""
    if not (a > 0.0 and b > 0.0):
        raise ValueError(f"Beta shapes must be positive, got ({a}, {b})")
    return _as_generator(rng).beta(a, b, size=size)


def sample_fnr_radii(n: int, r: float, size: int, rng) -> np.ndarray:
    """Exact radii |X| for the power-law model: t = (1 - v) / (c2 v), v ~ Beta(r, n).

    Sampling v = 1 - u (the Beta(n, r) complement) keeps precision in the
    large-radius tail where the thin-shell statistics live.
    """
    if r <= 2.0:
        raise ValueError("tail rank must exceed 2")
    gen = _as_generator(rng)
    c2 = math.sqrt((n + 1.0) / ((r - 1.0) * (r - 2.0)))
    v = gen.beta(r, n, size=size)
    np.clip(v, 1e-300, 1.0, out=v)
    return (1.0 - v) / (c2 * v)


def sample_fnr(n: int, r: float, size: int, rng) -> SampleBatch:
    """Full-coordinate draw from the power-law model (radius times direction)."""
    _check_batch_bytes(size, n)
    stream = rng if isinstance(rng, RngStream) else None
    gen = _as_generator(rng)
    t = sample_fnr_radii(n, r, size, gen)
    pts = sample_sphere(n, size, gen)
    pts *= t[:, None]
    return SampleBatch(pts, n=n, kind="points",
                       model={"kind": "fnr", "n": int(n), "r": float(r)},
                       seed=stream.seed if stream else 0,
                       stream=stream.stream if stream else 0)


def _check_batch_bytes(size: int, n: int) -> None:
    need = int(size) * int(n) * 8
    if need > MAX_BATCH_BYTES:
        raise ValueError(
            f"batch of {size} x {n} float64 needs {need / 2**30:.1f} GiB "
            f"(cap {MAX_BATCH_BYTES / 2**30:.0f} GiB); draw radii only via "
            "sample_fnr_radii for norm statistics"
        )


def _radius_quantile_table(model: MeasureModel, knots: int = 4097,
                           span: float = 1e6):
    """Monotone table (cdf, t) for the radius law of a radial model."""
    prof = model.profile
    n = model.n
    xs = np.linspace(0.0, math.asinh(span), knots)
    ts = prof.scale * np.sinh(xs)
    # density of |X| is proportional to t^(n-1) w(t); integrate per segment
    # with fixed 15-point panels (plenty for an interpolation table).
    a, b = ts[:-1], ts[1:]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = mid[:, None] + half[:, None] * _quad._KRONROD_NODES[None, :]
    logw = prof.log_value(np.maximum(nodes, 0.0).ravel()).reshape(nodes.shape)
    with np.errstate(divide="ignore"):
        logf = np.where(nodes > 0, (n - 1) * np.log(np.maximum(nodes, 1e-300)),
                        0.0 if n == 1 else -np.inf) + logw
    peak = logf.max()
    seg = (np.exp(logf - peak) * _quad._KRONROD_WEIGHTS[None, :]).sum(axis=1) * half
    cdf = np.concatenate([[0.0], np.cumsum(seg)])
    cdf /= cdf[-1]
    return cdf, ts


def sample_model(model: MeasureModel, size: int, rng) -> SampleBatch:
    """Draw coordinate points from a radial or affine-radial model."""
    stream = rng if isinstance(rng, RngStream) else None
    gen = _as_generator(rng)
    if model.kind == "radial":
        if model.name.startswith("fnr("):
            batch = sample_fnr(model.n, model.r, size, gen)
        else:
            _check_batch_bytes(size, model.n)
            cdf, ts = _radius_quantile_table(model)
            t = np.interp(gen.uniform(size=size), cdf, ts)
            pts = sample_sphere(model.n, size, gen)
            pts *= t[:, None]
            batch = SampleBatch(pts, n=model.n, model=_model_dict(model))
    elif model.kind == "affine_radial":
        base = sample_model(model.base, size, gen)
        pts = base.points @ model.map.T + model.shift
        batch = SampleBatch(pts, n=model.n, model=_model_dict(model))
    else:
        raise NotImplementedError("explicit models have no sampler")
    if stream:
        batch.seed, batch.stream = stream.seed, stream.stream
    return batch


def sample_projection(model: MeasureModel, theta, size: int, rng) -> np.ndarray:
    """Exact draw of <X, theta> without materializing coordinate points.

    For rotation-invariant X, <X, theta/|theta|> equals |X| times the first
    coordinate of an independent uniform direction, which is
    Z / sqrt(Z^2 + Q) with Z standard normal and Q chi-square(n - 1).
    """
    theta = np.asarray(theta, dtype=float)
    nrm = float(np.linalg.norm(theta))
    if nrm == 0:
        raise ValueError("direction must be nonzero")
    gen = _as_generator(rng)
    if model.kind == "affine_radial":
        u = model.map.T @ (theta / nrm)
        base = sample_projection(model.base, u / np.linalg.norm(u), size, gen)
        return (np.linalg.norm(u) * base + float(model.shift @ theta / nrm)) * nrm
    if model.kind != "radial":
        raise NotImplementedError("explicit models have no projection sampler")
    if model.name.startswith("fnr("):
        t = sample_fnr_radii(model.n, model.r, size, gen)
    else:
        cdf, ts = _radius_quantile_table(model)
        t = np.interp(gen.uniform(size=size), cdf, ts)
    if model.n == 1:
        sign = gen.integers(0, 2, size=size) * 2.0 - 1.0
        return nrm * t * sign
    z = gen.standard_normal(size)
    q = gen.chisquare(model.n - 1, size=size)
    return nrm * t * z / np.sqrt(z * z + q)


def haar_rotation(n: int, rng, size: int | None = None) -> np.ndarray:
    """Haar-uniform rotation(s) from SO(n): shape (n, n) or (size, n, n)."""
    gen = _as_generator(rng)
    count = 1 if size is None else int(size)
    out = np.empty((count, n, n))
    for i in range(count):
        g = gen.standard_normal((n, n))
        q, rmat = np.linalg.qr(g)
        q = q * np.sign(np.diag(rmat))[None, :]
        if np.linalg.det(q) < 0:
            q[:, -1] = -q[:, -1]
        out[i] = q
    return out[0] if size is None else out
