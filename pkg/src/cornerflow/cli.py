"""Command-line interface.

Subcommands:

  simulate           run a configured flow, write diagnostics + snapshots
  probe-map          map sanity report: corner exponents, far field, roundtrip
  kernel-test        Green-function/kernel identity checks on the domain
  validate-lyapunov  boundary-functional certificates along a run
  twin-run           run a perturbed twin and measure field-level divergence

All subcommands take --config (JSON run file), --out (output directory),
--threads (accepted for interface stability; the kernels are deterministic
and single-threaded) and --quiet. Exit codes: 0 = all armed checks passed,
1 = an armed check failed or a run error occurred, 2 = config problem.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from ._backend import BACKEND_NAME
from .biot_savart import CirculationSpec, VortexEnsemble, velocity_field
from .config import TwinSpec, parse_config
from .conformal import corner_exponent_probe, farfield_coefficients
from .errors import (
    CirculationMismatch,
    CornerflowError,
    EmptyTrace,
    ParseError,
    ValidationError,
)
from .harmonic_split import GridSpec, projection_inequality_check, twin_run_divergence
from .lyapunov import (
    check_L1_lower,
    check_L1_upper,
    gronwall_monitor,
    orthogonality_residual,
    sign_conditions,
)
from .transport import patch_init, simulate

__all__ = ["main"]


def _fmt(x) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
            fh.write("\n")


def _np_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _jsonable(obj):
    """Nonfinite floats have no strict-JSON encoding; map them to null."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return None
    return obj


def _write_json(path: Path, obj):
    path.write_text(json.dumps(_jsonable(obj), indent=2, default=_np_default) + "\n")


def _run(cfg, quiet: bool):
    cmap, ens, circ = cfg.build()
    result = simulate(
        cmap,
        ens,
        circ,
        cfg.t_final,
        dt=cfg.dt,
        output_stride=cfg.output_stride,
        tracked=cfg.tracked,
        probe_rho=cfg.probe_rho,
        quiet=quiet,
    )
    return cmap, ens, circ, result


# --------------------------------------------------------------------------
# simulate
# --------------------------------------------------------------------------


def _invariants(cmap, ens0, circ, result):
    recs = result.records
    out = []

    def add(name, armed, value, tol, ok):
        out.append(
            {
                "name": name,
                "armed": bool(armed),
                "pass": (None if not armed else bool(ok)),
                "value": (None if value is None or not math.isfinite(value) else float(value)),
                "tolerance": float(tol),
            }
        )

    for field, name in (
        ("total_circ", "total_circulation_conserved"),
        ("l1", "l1_proxy_conserved"),
        ("linf", "linf_proxy_conserved"),
    ):
        vals = [getattr(r, field) for r in recs]
        value = max(abs(v - vals[0]) for v in vals)
        add(name, True, value, 0.0, value <= 0.0)

    dev = max(abs(r.gamma - circ.gamma0) for r in recs)
    add("gamma_probe_consistent", True, dev, 1e-3, dev <= 1e-3)

    r0 = result.initial_support
    c = result.support_constant
    excess = max(r.support_radius - (r0 + c * r.t) for r in recs)
    add("support_bound", True, excess, 1e-9, excess <= 1e-9)

    armed, _sigma = sign_conditions(cmap.kind, ens0, circ)
    g0 = recs[0].min_gap
    if g0 > 0.0 and math.isfinite(g0):
        ratio = min(r.min_gap for r in recs) / g0
    else:
        ratio = float("nan")
        armed = False
    add("boundary_gap_floor", armed, ratio, 0.5, ratio >= 0.5)

    env_armed = armed and bool(result.traces)
    if env_armed:
        worst = 0.0
        ok = True
        for tr in result.traces.values():
            try:
                t, _l1, _dl1, lv = tr.as_arrays()
                fit = gronwall_monitor(t, lv)
            except EmptyTrace:
                ok = False
                worst = float("inf")
                break
            scale = max(1.0, float(np.max(np.abs(fit.envelope))))
            worst = max(worst, fit.max_excess / scale)
        add("lyapunov_envelope", True, worst, 0.1, ok and worst <= 0.1)
    else:
        add("lyapunov_envelope", False, None, 0.1, None)
    return out


def _cmd_simulate(args) -> int:
    cfg = parse_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cmap, ens, circ, result = _run(cfg, args.quiet)

    _write_csv(
        out / "diagnostics.csv",
        ("t", "total_circ", "l1", "linf", "support_radius", "min_gap", "gamma", "lyap_max"),
        [r.row() for r in result.records],
    )

    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    for k, (t, snap) in enumerate(result.snapshots):
        _write_json(
            snap_dir / f"snapshot_{k:06d}.json",
            {
                "time": t,
                "particles": [
                    {
                        "x": float(z.real),
                        "y": float(z.imag),
                        "gamma": float(g),
                        "delta": float(d),
                    }
                    for z, g, d in zip(snap.z, snap.gamma, snap.delta)
                ],
            },
        )

    if result.traces:
        rows = []
        for idx in sorted(result.traces):
            t, l1, dl1, lv = result.traces[idx].as_arrays()
            for k in range(t.size):
                rows.append([str(idx), t[k], l1[k], dl1[k], lv[k]])
        _write_csv(out / "lyapunov_trace.csv", ("particle", "t", "L1", "dt_L1", "L"), rows)

    invariants = _invariants(cmap, ens, circ, result)
    failed = [i["name"] for i in invariants if i["armed"] and not i["pass"]]
    summary = {
        "command": "simulate",
        "backend": BACKEND_NAME,
        "dt": result.dt,
        "n_steps": result.n_steps,
        "n_particles": len(ens),
        "support": {
            "initial_radius": result.initial_support,
            "constant": result.support_constant,
        },
        "probe_rho": result.probe_rho,
        "all_invariants": invariants,
        "failed": failed,
        "config": cfg.raw,
    }
    _write_json(out / "summary.json", summary)
    if not args.quiet:
        for inv in invariants:
            state = "PASS" if inv["pass"] else ("FAIL" if inv["armed"] else "off")
            print(f"  [{state:4}] {inv['name']}: value={inv['value']}")
    return 1 if failed else 0


# --------------------------------------------------------------------------
# probe-map
# --------------------------------------------------------------------------


def _cmd_probe_map(args) -> int:
    cfg = parse_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cmap = cfg.domain.build()

    if cmap.kind == "exterior":
        radii = (1.1, 1.5, 2.0, 5.0, 10.0)
    else:
        radii = (0.15, 0.3, 0.5, 0.7, 0.85)
    ang = (np.arange(16) + 0.5) * (2.0 * np.pi / 16)
    worst = 0.0
    for r in radii:
        w = r * np.exp(1j * ang)
        back = cmap.map_values(cmap.inverse_values(w))
        worst = max(worst, float(np.max(np.abs(back - w))))

    corners = []
    for c in cmap.corners:
        fit = corner_exponent_probe(cmap, c)
        corners.append(
            {
                "x": float(c.position.real),
                "y": float(c.position.imag),
                "interior_angle": float(c.interior_angle),
                "fitted_slope": fit.slope,
                "expected_slope": fit.expected,
                "max_residual": fit.max_residual,
            }
        )

    if cmap.kind == "exterior":
        ff = farfield_coefficients(cmap)
        farfield = {
            "beta": [ff.beta.real, ff.beta.imag],
            "beta_tilde": [ff.beta_tilde.real, ff.beta_tilde.imag],
            "residual": ff.residual,
            "radius": ff.radius,
        }
    else:
        farfield = None

    report = {
        "command": "probe-map",
        "map_id": cmap.map_id,
        "kind": cmap.kind,
        "roundtrip_max_error": worst,
        "corners": corners,
        "farfield": farfield,
    }
    _write_json(out / "probe_map.json", report)
    if not args.quiet:
        print(json.dumps(report, indent=2))
    return 0


# --------------------------------------------------------------------------
# kernel-test
# --------------------------------------------------------------------------


def _domain_samples(cmap, n, rng):
    """Deterministic sample points, uniform on a mapped-plane annulus."""
    if cmap.kind == "exterior":
        rho = rng.uniform(1.2, 3.0, n)
    else:
        rho = rng.uniform(0.15, 0.85, n)
    th = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.asarray(cmap.inverse_values(rho * np.exp(1j * th)), dtype=complex)


def _cmd_kernel_test(args) -> int:
    from .biot_savart import green_function, kernel_K, mapped_circle_contour, circulation_probe

    cfg = parse_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cmap = cfg.domain.build()
    rng = np.random.default_rng(20240817)

    checks = []

    n_pairs = 1000
    xs = _domain_samples(cmap, n_pairs, rng)
    ys = _domain_samples(cmap, n_pairs, rng)
    keep = np.abs(xs - ys) > 1e-6
    xs, ys = xs[keep], ys[keep]

    sym = max(
        abs(green_function(cmap, x, y) - green_function(cmap, y, x))
        for x, y in zip(xs, ys)
    )
    checks.append(("green_symmetry", xs.size, sym, 1e-12))

    gmax = max(green_function(cmap, x, y) for x, y in zip(xs, ys))
    checks.append(("green_negative", xs.size, gmax, 0.0))

    # naive two-sided evaluation of the boundary fraction identity
    zx = np.asarray(cmap.map_values(xs))
    zy = np.asarray(cmap.map_values(ys))
    ystar = zy / np.abs(zy) ** 2
    denom = np.abs(zx - ystar) ** 2 * np.abs(zy) ** 2
    lhs = np.abs(zx - zy) ** 2 / denom
    rhs = 1.0 - (np.abs(zx) ** 2 - 1.0) * (np.abs(zy) ** 2 - 1.0) / denom
    frac = float(np.max(np.abs(lhs - rhs)))
    checks.append(("fraction_identity", xs.size, frac, 1e-12))

    worst = 0.0
    for x, y in zip(xs[:50], ys[:50]):
        k = kernel_K(cmap, x, y)
        s = 1e-7 * max(1.0, abs(x))
        gp = [
            green_function(cmap, x + d, y)
            for d in (s, -s, 1j * s, -1j * s)
        ]
        gx = (gp[0] - gp[1]) / (2.0 * s)
        gy = (gp[2] - gp[3]) / (2.0 * s)
        fd = np.array([-gy, gx])
        worst = max(worst, float(np.max(np.abs(k - fd)) / max(1e-30, np.max(np.abs(k)))))
    checks.append(("kernel_vs_green_gradient", 50, worst, 1e-5))

    if cmap.kind == "exterior":
        unit = CirculationSpec(gamma0=1.0, alpha=1.0)
        nothing = VortexEnsemble.empty()
        contour = mapped_circle_contour(cmap, 2.0)
        circ_val = circulation_probe(cmap, nothing, unit, contour)
        checks.append(
            ("harmonic_circulation", contour.vertices.size, abs(circ_val - 1.0), 1e-6)
        )

        rho = np.geomspace(10.0, 1000.0, 7)
        pts = np.asarray(cmap.inverse_values(rho * np.exp(0.3j)))
        h = velocity_field(cmap, nothing, unit, pts)
        slope = float(np.polyfit(np.log(np.abs(pts)), np.log(np.abs(h)), 1)[0])
        checks.append(("harmonic_far_decay", rho.size, abs(slope + 1.0), 0.01))

    rows = []
    all_ok = True
    for name, n, value, tol in checks:
        ok = value <= tol
        all_ok &= ok
        rows.append([name, float(n), value, tol, "pass" if ok else "fail"])
        if not args.quiet:
            print(f"  [{'PASS' if ok else 'FAIL'}] {name}: {value:.3e} (tol {tol:g})")
    _write_csv(out / "kernel_checks.csv",
               ("check", "n_samples", "max_residual", "tolerance", "result"), rows)
    return 0 if all_ok else 1


# --------------------------------------------------------------------------
# validate-lyapunov
# --------------------------------------------------------------------------


def _orthogonality_probes(cmap, ens, patch):
    """Probe points in the gap region and on a ring around the patch."""
    zeta = np.abs(cmap.map_values(ens.z))
    pts = []
    if cmap.kind == "exterior":
        ring = 0.5 * (1.0 + float(np.min(zeta)))
    else:
        ring = 0.5 * (1.0 + float(np.max(zeta)))
    ang = (np.arange(16) + 0.5) * (2.0 * np.pi / 16)
    pts.extend(np.asarray(cmap.inverse_values(ring * np.exp(1j * ang))))
    c = patch.center
    phys = c + 1.15 * patch.size * np.exp(1j * ang)
    inside = np.asarray(cmap.contains(phys), dtype=bool)
    pts.extend(phys[inside])
    pts = np.asarray(pts, dtype=complex)
    # drop anything exactly on a particle (cannot happen generically)
    keep = np.array([np.min(np.abs(ens.z - p)) > 0.0 for p in pts])
    return pts[keep]


def _pinch_points(cmap, gaps=None, n_rays: int = 4):
    if gaps is None:
        gaps = np.geomspace(1e-3, 1e-1, 7)
    ang = (np.arange(n_rays) + 0.37) * (2.0 * np.pi / n_rays)
    rr = []
    for g in gaps:
        rho = 1.0 + g if cmap.kind == "exterior" else 1.0 - g
        rr.extend(rho * np.exp(1j * ang))
    return np.asarray(cmap.inverse_values(np.asarray(rr)), dtype=complex)


def _cmd_validate_lyapunov(args) -> int:
    cfg = parse_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not cfg.tracked:
        cfg = dataclasses.replace(cfg, tracked=(0,))
    cmap, ens, circ, result = _run(cfg, args.quiet)

    rows = []
    for idx in sorted(result.traces):
        t, l1, dl1, lv = result.traces[idx].as_arrays()
        for k in range(t.size):
            rows.append([str(idx), t[k], l1[k], dl1[k], lv[k]])
    _write_csv(out / "lyapunov_trace.csv", ("particle", "t", "L1", "dt_L1", "L"), rows)

    checks = []
    ens_f = result.final_state.ensemble

    probes = _orthogonality_probes(cmap, ens_f, cfg.patch)
    orth = max(
        orthogonality_residual(cmap, ens_f, circ, p) for p in probes
    )
    checks.append({"name": "orthogonality", "armed": True,
                   "value": float(orth), "tolerance": 1e-5, "pass": orth <= 1e-5})

    worst = 0.0
    for idx in sorted(result.traces):
        tr = result.traces[idx]
        tmid, fd = tr.fd_dt()
        _, _, dl1, _ = tr.as_arrays()
        scale = float(np.max(np.abs(dl1))) or 1.0
        worst = max(worst, float(np.max(np.abs(fd - dl1[1:-1])) / scale))
    checks.append({"name": "dt_formula_vs_fd", "armed": True,
                   "value": worst, "tolerance": 1e-3, "pass": worst <= 1e-3})

    pinch_pts = _pinch_points(cmap)
    upper = check_L1_upper(cmap, ens_f, circ, pinch_pts)
    up_ok = math.isfinite(upper.constant)
    checks.append({"name": "pinch_upper_finite", "armed": True,
                   "value": upper.constant if up_ok else None,
                   "tolerance": None, "pass": up_ok})

    armed, _ = sign_conditions(cmap.kind, ens_f, circ)
    if armed:
        lower = check_L1_lower(cmap, ens_f, circ, pinch_pts)
        checks.append({"name": "pinch_lower_positive", "armed": True,
                       "value": lower.constant, "tolerance": 0.0,
                       "pass": lower.constant > 0.0})
    else:
        checks.append({"name": "pinch_lower_positive", "armed": False,
                       "value": None, "tolerance": 0.0, "pass": None})

    env_worst = 0.0
    env_ok = True
    for idx in sorted(result.traces):
        t, _l1, _dl1, lv = result.traces[idx].as_arrays()
        try:
            fit = gronwall_monitor(t, lv)
        except EmptyTrace:
            env_ok = False
            continue
        scale = max(1.0, float(np.max(np.abs(fit.envelope))))
        env_worst = max(env_worst, fit.max_excess / scale)
    checks.append({"name": "gronwall_envelope", "armed": armed,
                   "value": env_worst if env_ok else None, "tolerance": 0.1,
                   "pass": (env_ok and env_worst <= 0.1) if armed else None})

    failed = [c["name"] for c in checks if c["armed"] and not c["pass"]]
    _write_json(out / "lyapunov_summary.json", {
        "command": "validate-lyapunov",
        "backend": BACKEND_NAME,
        "checks": checks,
        "failed": failed,
        "config": cfg.raw,
    })
    if not args.quiet:
        for c in checks:
            state = "PASS" if c["pass"] else ("FAIL" if c["armed"] else "off")
            print(f"  [{state:4}] {c['name']}: value={c['value']}")
    return 1 if failed else 0


# --------------------------------------------------------------------------
# twin-run
# --------------------------------------------------------------------------


def _cmd_twin_run(args) -> int:
    cfg = parse_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    twin = cfg.twin or TwinSpec()

    cmap, ens_a, circ_a = cfg.build()
    dt = cfg.dt
    if dt == "auto":
        from .transport import auto_time_step

        dt = auto_time_step(cmap, ens_a, circ_a)

    if twin.mode == "identical":
        _cmap_b, ens_b, circ_b = cfg.build()
    elif twin.mode == "jitter":
        rng = np.random.default_rng(cfg.seed)
        phases = rng.uniform(0.0, 2.0 * np.pi, len(ens_a))
        moved = ens_a.z + twin.epsilon * np.exp(1j * phases)
        if not np.all(cmap.contains(moved)):
            raise ValidationError("jitter pushed a particle out of the domain")
        ens_b = ens_a.with_positions(moved)
        circ_b = CirculationSpec.for_domain(cmap.kind, cfg.gamma0, ens_b)
    else:  # refine
        half = dataclasses.replace(cfg.patch, h=cfg.patch.h / 2.0)
        ens_b = patch_init(cmap, half)
        circ_b = CirculationSpec.for_domain(cmap.kind, cfg.gamma0, ens_b)

    common = dict(dt=dt, output_stride=cfg.output_stride, quiet=True)
    res_a = simulate(cmap, ens_a, circ_a, cfg.t_final, **common)
    res_b = simulate(cmap, ens_b, circ_b, cfg.t_final, **common)

    reach = max(
        res_a.initial_support + res_a.support_constant * cfg.t_final,
        res_b.initial_support + res_b.support_constant * cfg.t_final,
    )
    grid = GridSpec(radius=reach + 2.0, spacing=cfg.patch.h)
    series = twin_run_divergence(res_a.snapshots, res_b.snapshots, grid)

    _write_csv(
        out / "twin_gap.csv",
        ("t", "gap_l2", "fitted_rate"),
        [[t, g, series.fitted_rate] for t, g in zip(series.times, series.gap_l2)],
    )

    try:
        proj = projection_inequality_check(
            cmap,
            res_a.final_state.ensemble, circ_a,
            res_b.final_state.ensemble, circ_b,
            grid,
        )
        projection = {
            "v_norm": proj.v_norm,
            "w_norm": proj.w_norm,
            "ratio": proj.ratio,
            "n_nodes": proj.n_nodes,
        }
    except CirculationMismatch:
        projection = None  # refine twins change the lattice totals

    ok = True
    if twin.mode == "identical":
        ok = bool(np.all(series.gap_l2 == 0.0))

    _write_json(out / "twin_summary.json", {
        "command": "twin-run",
        "backend": BACKEND_NAME,
        "mode": twin.mode,
        "epsilon": twin.epsilon,
        "dt": dt,
        "fitted_rate": series.fitted_rate,
        "gap_initial": float(series.gap_l2[0]),
        "gap_final": float(series.gap_l2[-1]),
        "identical_gap_zero": (bool(np.all(series.gap_l2 == 0.0))
                               if twin.mode == "identical" else None),
        "projection": projection,
        "config": cfg.raw,
    })
    if not args.quiet:
        print(f"  twin mode={twin.mode} rate={series.fitted_rate:.4g} "
              f"gap(T)={series.gap_l2[-1]:.4e}")
    return 0 if ok else 1


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--threads", type=int, default=1,
                        help="worker cap (kernels are single-threaded)")
    common.add_argument("--quiet", action="store_true", help="suppress progress")

    parser = argparse.ArgumentParser(
        prog="cornerflow",
        description="Vortex dynamics around and inside domains with corners.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, desc in (
        ("simulate", _cmd_simulate, "run a flow and write diagnostics"),
        ("probe-map", _cmd_probe_map, "conformal map sanity report"),
        ("kernel-test", _cmd_kernel_test, "Green function and kernel checks"),
        ("validate-lyapunov", _cmd_validate_lyapunov,
         "boundary-functional certificates along a run"),
        ("twin-run", _cmd_twin_run, "divergence of a perturbed twin run"),
    ):
        p = sub.add_parser(name, parents=[common], help=desc)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CornerflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
