"""Batch experiment runner writing seeded CSV/JSON artifacts.

Every subcommand resolves an output directory (``--out-dir``, else the
``THINSHELL_OUT_DIR`` environment variable, else ``./artifacts``), runs a
fixed experiment, and writes artifacts whose first header carries the
config hash and seed; re-running the same config byte-reproduces the
artifact bodies.  Check subcommands refuse to run without a calibration
file so the empirical constants cannot drift silently; ``calibrate`` is
the only command that writes one.

Exit codes: 0 all checks passed, 1 a check failed, 2 usage error
(including missing calibration), 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from ._quad import QuadratureError
from .bodies import (density_body_identity, eccentricity_comparison,
                     interval_body, moment_body_convexity,
                     moment_body_sandwich, one_sided_ball_ratio,
                     polygon_body, slab_support_sandwich)
from .calibrate import run_calibration
from .concavity import (h_transform, khinchine_check, logconcavity_test,
                        two_scale_profile)
from .measures import (make_affine, make_fnr, make_random_convex_density,
                       ray_log_density)
from .moments import (CalibrationMissing, alpha_limit, alpha_p,
                      epsilon_thin_shell, exact_moment_fnr, load_calibration,
                      mc_moment, theorem_bound)
from .rotations import (RotationMomentContext, log_lipschitz_estimate,
                        polar_identity_check, reverse_holder_check)
from .sampling import RngStream, _as_generator, haar_rotation, sample_fnr
from .specfun import beta_root

__all__ = ["main"]

_CHECKS = ("bodies-check", "concavity-check", "khinchine", "polar-identity",
           "reverse-holder", "log-lipschitz")


# ---------------------------------------------------------------------------
# artifact plumbing


def _out_dir(args) -> Path:
    path = args.out_dir or os.environ.get("THINSHELL_OUT_DIR") or "artifacts"
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config_hash(cmd: str, args) -> str:
    """Short hash of the experiment parameters (not of output locations)."""
    skip = {"func", "out_dir"}
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    blob = json.dumps({"cmd": cmd, **payload}, sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _clean(value):
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return value.item()
    return value


def _write_json(path: Path, config: str, seed, payload: dict) -> None:
    body = {"config": config, "seed": seed, **_clean(payload)}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, config: str, seed, columns, rows) -> None:
    lines = [f"# config={config} seed={seed}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(repr(v) if isinstance(v, float) else str(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


def _require_calibration(args):
    return load_calibration(getattr(args, "calibration", None))


def _int_list(text: str):
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str):
    return [float(v) for v in text.split(",") if v]


def _status(passed: bool, label: str) -> int:
    print(f"{'PASS' if passed else 'FAIL'} {label}")
    return 0 if passed else 1


# ---------------------------------------------------------------------------
# subcommands


def _cmd_moments(args) -> int:
    config = _config_hash("moments", args)
    exact = exact_moment_fnr(args.n, args.r, args.p)
    batch = sample_fnr(args.n, args.r, args.size, RngStream(args.seed, 0))
    est = mc_moment(batch, args.p, r=args.r)
    z = (est.value - exact) / est.se if est.se > 0 else 0.0
    passed = abs(z) <= 3.0
    _write_json(_out_dir(args) / "moments.json", config, args.seed, {
        "n": args.n, "r": args.r, "p": args.p, "size": args.size,
        "exact": exact, "mc": est.value, "se": est.se, "z": z,
        "heavy_tail": est.heavy_tail, "passed": passed,
    })
    return _status(passed, f"moments: exact={exact:.6g} mc={est.value:.6g} "
                           f"z={z:+.2f}")


def _cmd_fact(args) -> int:
    config = _config_hash("fact", args)
    limit = alpha_limit(args.r, args.p)
    rows = [(n, args.r, args.p, alpha_p((n, args.r), args.p), limit)
            for n in args.n_grid]
    _write_csv(_out_dir(args) / "fact.csv", config, args.seed,
               ("n", "r", "p", "alpha_exact", "alpha_limit"), rows)
    final_gap = abs(rows[-1][3] - limit)
    print(f"INFO fact: alpha at n={rows[-1][0]} is {rows[-1][3]:.6g}, "
          f"limit {limit:.6g}, gap {final_gap:.2e}")
    return 0


def _cmd_thinshell(args) -> int:
    config = _config_hash("thinshell", args)
    batch = sample_fnr(args.n, args.r, args.N, RngStream(args.seed, 0))
    est = epsilon_thin_shell(batch)
    _write_json(_out_dir(args) / "thinshell.json", config, args.seed, {
        "n": args.n, "r": args.r, "size": args.N,
        "epsilon": est.epsilon, "survival": est.survival,
        "survival_lo": est.survival_lo, "survival_hi": est.survival_hi,
        "count": est.count, "curve_t": est.curve_t, "curve_g": est.curve_g,
    })
    print(f"INFO thinshell: epsilon={est.epsilon:.5f} "
          f"survival={est.survival:.5f}")
    return 0


def _cmd_bodies_check(args) -> int:
    config = _config_hash("bodies-check", args)
    constants = _require_calibration(args)
    gen = _as_generator(RngStream(args.seed, 0))
    items = []

    for i in range(args.draws):
        n = int(gen.integers(1, 4))
        r = float(gen.uniform(5.0, 12.0))
        model = make_fnr(n, r)
        if gen.uniform() < 0.5 and n > 1:
            model = make_affine(model, _random_map(n, 4.0, gen))
        a = float(gen.uniform(0.2, 0.8)) * (r + n - 1.0)
        b = min(a * float(gen.uniform(1.1, 1.5)), 0.98 * (n + r))
        conv = moment_body_convexity(model, a, trials=args.trials,
                                     rng=RngStream(args.seed, 10 + i))
        sand = moment_body_sandwich(model, min(a, b), max(a, b),
                                    rng=RngStream(args.seed, 40 + i))
        items.append({"name": f"convexity[{i}] n={n} r={r:.2f} a={a:.2f}",
                      "passed": conv.passed,
                      "detail": {"max_violation": conv.max_violation}})
        items.append({"name": f"sandwich[{i}] n={n} r={r:.2f}",
                      "passed": sand.passed,
                      "detail": {"lower": sand.max_lower_violation,
                                 "upper": sand.max_upper_violation}})

    for m in (1, 2):
        model = make_fnr(m, 8.0)
        rep = density_body_identity(model, 2.0)
        items.append({"name": f"density-body identity m={m}",
                      "passed": rep.rel_error <= 1e-6,
                      "detail": {"rel_error": rep.rel_error}})

    square = polygon_body([(1, 1), (-1, 1), (-1, -1), (1, -1)])
    tri = polygon_body([(0, 0), (1, 0), (0, 1)])
    for body, theta in ((interval_body(), [1.0]), (square, [1.0, 0.0]),
                        (tri, [1.0, 0.0])):
        for q in range(1, 9):
            rep = slab_support_sandwich(body, float(q), theta)
            items.append({"name": f"slab {body.name} q={q}",
                          "passed": rep.passed,
                          "detail": {"middle": rep.middle,
                                     "support": rep.support}})

    for i in range(4):
        m = 1 + i % 2
        model = make_affine(make_fnr(m, 8.0), _random_map(m, 10.0, gen))
        rep = eccentricity_comparison(model, float(m),
                                      bound=constants.eccentricity_ratio_c)
        items.append({"name": f"eccentricity[{i}] m={m}",
                      "passed": rep.passed,
                      "detail": {"ratio": rep.ratio, "bound": rep.bound}})

    for n, r in ((2, 8.0), (3, 10.0)):
        model = make_fnr(n, r)
        for q in (1.0, 2.0, min(4.0, r - 1.0)):
            value = one_sided_ball_ratio(model, q).value
            bound = constants.one_sided_ratio_c * q
            items.append({"name": f"one-sided growth n={n} q={q}",
                          "passed": value <= bound,
                          "detail": {"value": value, "bound": bound}})

    passed = all(item["passed"] for item in items)
    _write_json(_out_dir(args) / "bodies_check.json", config, args.seed,
                {"items": items, "passed": passed})
    failed = sum(not item["passed"] for item in items)
    return _status(passed, f"bodies-check: {len(items) - failed}/{len(items)} "
                           f"items passed")


def _random_map(n: int, max_cond: float, gen) -> np.ndarray:
    u = haar_rotation(n, gen) if n > 1 else np.eye(1)
    svals = np.exp(gen.uniform(0.0, math.log(max_cond), size=n))
    svals /= svals.min()
    return u @ np.diag(svals)


def _cmd_concavity_check(args) -> int:
    config = _config_hash("concavity-check", args)
    _require_calibration(args)
    gen = _as_generator(RngStream(args.seed, 0))
    worst = -math.inf
    failures = 0
    for _ in range(args.cases):
        alpha = float(gen.uniform(3.0, 50.0))
        model = make_random_convex_density(1, alpha - 1.0, gen)
        ray, tail, scale = ray_log_density(model, np.array([1.0]))
        ps = np.linspace(0.0, 0.8 * alpha, 17)
        prof = h_transform(ray, ps, alpha=tail, scale=scale)
        rep = logconcavity_test(prof.ps, prof.log_values, tol=args.tol)
        worst = max(worst, rep.max_violation)
        failures += not rep.passed

    neg = two_scale_profile(8.0)
    neg_prof = h_transform(neg, np.linspace(0.0, 6.4, 17), alpha=8.0)
    neg_rep = logconcavity_test(neg_prof.ps, neg_prof.log_values,
                                tol=args.tol)
    passed = failures == 0 and not neg_rep.passed
    _write_json(_out_dir(args) / "concavity_check.json", config, args.seed, {
        "cases": args.cases, "failures": failures, "max_violation": worst,
        "negative_control_violation": neg_rep.max_violation,
        "negative_control_failed": not neg_rep.passed, "passed": passed,
    })
    return _status(passed, f"concavity-check: {args.cases - failures}/"
                           f"{args.cases} transforms log-concave, negative "
                           f"control {'caught' if not neg_rep.passed else 'missed'}")


def _cmd_khinchine(args) -> int:
    config = _config_hash("khinchine", args)
    _require_calibration(args)
    gen = _as_generator(RngStream(args.seed, 0))
    worst = 0.0
    failures = 0
    for i in range(args.cases):
        n = int(gen.integers(1, 5))
        r = float(gen.uniform(4.0, 15.0))
        model = make_fnr(n, r)
        if n > 1 and gen.uniform() < 0.4:
            model = make_affine(model, _random_map(n, 3.0, gen))
        q = float(gen.uniform(1.0, r - 1.0))
        p = float(gen.uniform(0.2, 1.0)) * q
        theta = gen.normal(size=n)
        rep = khinchine_check(model, p, q, theta=theta,
                              mc_size=args.mc_size,
                              rng=RngStream(args.seed, 100 + i))
        worst = max(worst, rep.ratio)
        failures += not rep.holds
    passed = failures == 0
    _write_json(_out_dir(args) / "khinchine.json", config, args.seed, {
        "cases": args.cases, "failures": failures,
        "worst_lhs_over_rhs": worst, "passed": passed,
    })
    return _status(passed, f"khinchine: {args.cases - failures}/{args.cases} "
                           f"cases passed, worst ratio {worst:.4f}")


def _build_rotation_ctx(args) -> RotationMomentContext:
    model = make_fnr(args.n, args.r)
    if args.cond != 1.0:
        a = np.eye(args.n)
        a[0, 0] = args.cond
        model = make_affine(model, a)
    return RotationMomentContext(model, args.k)


def _cmd_polar_identity(args) -> int:
    config = _config_hash("polar-identity", args)
    _require_calibration(args)
    ctx = _build_rotation_ctx(args)
    rep = polar_identity_check(ctx, args.p, num_rotations=args.rotations,
                               rng=RngStream(args.seed, 0))
    _write_json(_out_dir(args) / "polar_identity.json", config, args.seed, {
        "n": args.n, "r": args.r, "k": args.k, "p": args.p,
        "cond": args.cond, "method": rep.method, "lhs": rep.lhs,
        "rhs": rep.rhs, "rel_error": rep.rel_error, "lhs_se": rep.lhs_se,
        "rhs_se": rep.rhs_se, "rotations": rep.rotations,
        "passed": rep.passed,
    })
    return _status(rep.passed, f"polar-identity: lhs={rep.lhs:.6g} "
                               f"rhs={rep.rhs:.6g} ({rep.method})")


def _cmd_reverse_holder(args) -> int:
    config = _config_hash("reverse-holder", args)
    constants = _require_calibration(args)
    ctx = _build_rotation_ctx(args)
    rep = reverse_holder_check(ctx, args.p, num_rotations=args.rotations,
                               rng=RngStream(args.seed, 0),
                               c_hat=constants.reverse_holder_c)
    _write_json(_out_dir(args) / "reverse_holder.json", config, args.seed, {
        "n": args.n, "r": args.r, "k": args.k, "p": args.p,
        "cond": args.cond, "ratio": rep.ratio, "slope": rep.slope,
        "bound": rep.bound, "rotations": rep.rotations, "passed": rep.passed,
    })
    return _status(bool(rep.passed), f"reverse-holder: ratio={rep.ratio:.4f} "
                                     f"bound={rep.bound:.4f}")


def _cmd_log_lipschitz(args) -> int:
    config = _config_hash("log-lipschitz", args)
    constants = _require_calibration(args)
    rows = []
    passed = True
    idx = 0
    for n in args.n_grid:
        base = make_fnr(n, args.r)
        for cond in args.cond_grid:
            a = np.eye(n)
            a[0, 0] = cond
            model = make_affine(base, a)
            for k in args.k_grid:
                ctx = RotationMomentContext(model, k)
                for p in args.p_grid:
                    idx += 1
                    slope = log_lipschitz_estimate(
                        ctx, p, num_pairs=args.pairs,
                        rng=RngStream(args.seed, idx))
                    envelope = (constants.log_lipschitz_c
                                * max(k, p) ** 2 * cond)
                    rows.append((n, k, p, cond, slope, envelope))
                    passed = passed and slope <= envelope
    out = _out_dir(args)
    _write_csv(out / "log_lipschitz.csv", config, args.seed,
               ("n", "k", "p", "cond", "slope", "envelope"), rows)
    worst = max((r[4] / r[5] for r in rows), default=0.0)
    _write_json(out / "log_lipschitz.json", config, args.seed, {
        "points": len(rows), "worst_fraction_of_envelope": worst,
        "passed": passed,
    })
    return _status(passed, f"log-lipschitz: {len(rows)} grid points, worst "
                           f"slope at {worst:.2f} of envelope")


def _cmd_calibrate(args) -> int:
    config = _config_hash("calibrate", args)
    constants = run_calibration(seed=args.seed, path=args.path)
    _write_json(_out_dir(args) / "calibrate.json", config, args.seed, {
        "constants": json.loads(constants.to_json()), "passed": True,
    })
    print(f"INFO calibrate: cstar={constants.theorem_cstar:.4f} "
          f"beta=[{constants.beta_root_lo:.4f}, {constants.beta_root_hi:.4f}] "
          f"loglip={constants.log_lipschitz_c:.4f} "
          f"holder={constants.reverse_holder_c:.4f}")
    return 0


_ARTIFACTS = ("moments.json", "thinshell.json", "bodies_check.json",
              "concavity_check.json", "khinchine.json",
              "polar_identity.json", "reverse_holder.json",
              "log_lipschitz.json", "calibrate.json")


def _cmd_report(args) -> int:
    config = _config_hash("report", args)
    out = _out_dir(args)
    rows = []
    any_fail = False
    for name in _ARTIFACTS:
        path = out / name
        if not path.exists():
            continue
        body = json.loads(path.read_text())
        passed = body.get("passed")
        status = "info" if passed is None else ("pass" if passed else "fail")
        any_fail = any_fail or status == "fail"
        rows.append((name, body.get("config", ""), body.get("seed", ""),
                     status))
    for name in ("fact.csv", "log_lipschitz.csv"):
        path = out / name
        if not path.exists():
            continue
        header = path.read_text().splitlines()[0]
        parts = dict(item.split("=") for item in header[2:].split())
        rows.append((name, parts.get("config", ""), parts.get("seed", ""),
                     "info"))
    _write_csv(out / "report.csv", config, args.seed,
               ("artifact", "config", "seed", "status"), rows)
    for row in rows:
        print(f"{row[3]:>5}  {row[0]:<22} config={row[1]} seed={row[2]}")
    if not rows:
        print("INFO report: no artifacts found")
    return 1 if any_fail else 0


# ---------------------------------------------------------------------------
# parser


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="thinshell",
        description="Seeded experiments on thin-shell concentration of "
                    "heavy-tailed convex measures.")
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--out-dir", default=None,
                       help="artifact directory (default THINSHELL_OUT_DIR "
                            "or ./artifacts)")
        p.add_argument("--seed", type=int, default=7, help="master RNG seed")
        if name in _CHECKS:
            p.add_argument("--calibration", default=None,
                           help="calibration file (default: packaged)")
        return p

    p = add("moments", _cmd_moments, "exact vs Monte-Carlo norm moments")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--size", type=int, default=200_000)

    p = add("fact", _cmd_fact, "moment defect across dimensions vs its limit")
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n-grid", type=_int_list, default=[100, 1000, 10000])

    p = add("thinshell", _cmd_thinshell, "empirical shell width of a sample")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=float, required=True)
    p.add_argument("--N", type=int, default=1_000_000)

    p = add("bodies-check", _cmd_bodies_check,
            "moment-body and one-sided-body battery")
    p.add_argument("--draws", type=int, default=8)
    p.add_argument("--trials", type=int, default=200)

    p = add("concavity-check", _cmd_concavity_check,
            "log-concavity of moment transforms of random convex profiles")
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)

    p = add("khinchine", _cmd_khinchine,
            "one-sided moment comparison against the extremal law")
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--mc-size", type=int, default=100_000)

    p = add("polar-identity", _cmd_polar_identity,
            "norm moments against rotation-averaged marginal moments")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--r", type=float, default=20.0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--cond", type=float, default=1.0)
    p.add_argument("--rotations", type=int, default=2000)

    p = add("reverse-holder", _cmd_reverse_holder,
            "Haar variance of the marginal moment vs the slope bound")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--r", type=float, default=20.0)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--p", type=float, default=3.0)
    p.add_argument("--cond", type=float, default=2.0)
    p.add_argument("--rotations", type=int, default=1000)

    p = add("log-lipschitz", _cmd_log_lipschitz,
            "rotation slopes of the marginal moment vs calibrated envelope")
    p.add_argument("--n-grid", type=_int_list, default=[10])
    p.add_argument("--k-grid", type=_int_list, default=[1, 2])
    p.add_argument("--p-grid", type=_float_list, default=[2.0, 3.0])
    p.add_argument("--cond-grid", type=_float_list, default=[2.0])
    p.add_argument("--r", type=float, default=20.0)
    p.add_argument("--pairs", type=int, default=32)

    p = add("calibrate", _cmd_calibrate,
            "fit and store the package's empirical constants")
    p.set_defaults(seed=1234)
    p.add_argument("--path", default=None,
                   help="calibration file destination (default: packaged)")

    add("report", _cmd_report, "aggregate artifact statuses into a table")
    return top


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except CalibrationMissing as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (QuadratureError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
