"""Command-line front end: ``dpt <subcommand> [options]``.

Every subcommand resolves a :class:`~dpt.config.RunConfig` from defaults, an
optional ``--config FILE`` / ``--preset NAME`` and explicit flags, writes its
artifacts under ``--out`` and prints the JSON report on stdout.

Exit codes: 0 on success (including inequality reports with
``holds = false``), 2 on invalid input, 3 on numerical failure.
"""

import argparse
import csv
import io
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import citest as ci
from . import config as cfgmod
from . import fields as fl
from . import immanants as im
from . import physics as ph
from . import report as rp
from . import singular as sg
from . import vlasov as vl
from .errors import NumericalError, ValidationError
from .symcone import detroot, random_psd

# -- runners ---------------------------------------------------------------------------


def run_immanant(cfg, out):
    d = cfg["degree"]
    rng = np.random.default_rng(cfg.seed)
    mats = random_psd(rng, d, size=cfg["samples"])
    e = im.generic_direction(d)
    rows = []
    for spec in im.all_specs(d):
        spec.check()
        deg = im.p_poly(spec, e).degree
        schur = im.schur_check(spec, mats)
        row = {"group": spec.group.name, "group_order": spec.group.order,
               "character": spec.label, "chi1": spec.chi1, "deg_p": deg,
               "is_signature": spec.is_signature(), "schur_samples": len(mats),
               "schur_violations": int(np.sum(~schur.holds)),
               "predicted_slope": im.predicted_immanant_slope(deg, d)}
        if cfg["scan"]:
            scan = im.gain_exponent_scan(im.GainFunction.immanant_power(spec),
                                         fit_points=cfg["fit_points"])
            row["fitted_slope"] = scan.fitted_slope
        rows.append(row)
    columns = ["group", "group_order", "character", "chi1", "deg_p", "is_signature",
               "schur_samples", "schur_violations", "predicted_slope", "fitted_slope"]
    path = rp.write_csv(out / "immanant.csv", columns, rows)
    degree_one = [r["character"] for r in rows if r["deg_p"] == 1]
    return {"csv": path.name, "rows": len(rows), "degree_one": degree_one,
            "degree_one_is_signature_only": degree_one == [f"S{d}:sign"],
            "schur_violations": sum(r["schur_violations"] for r in rows)}


def _detroot_family(d):
    return lambda a: detroot(a, 1.0 / (d - 1))


def run_tm_scan(cfg, out):
    d = cfg["dim"]
    family = cfg["family"]
    long_rows, summary = [], []
    if family == "detroot":
        grid = cfg["m_grid"] or (0.0, 0.25, 0.5, 0.75, 0.9 * (d - 1))
        expected = sg.tm_detroot_integral(0.0, d)
        for m in grid:
            val = im.ball_integral_tm(_detroot_family(d), m, d)
            long_rows.append({"function": "detroot", "dim": d, "m": m, "integral": val,
                              "expected": expected, "rel_error": abs(val - expected) / expected})
        worst = max(r["rel_error"] for r in long_rows)
        path = rp.write_csv(out / "tm_scan.csv",
                            ["function", "dim", "m", "integral", "expected", "rel_error"], long_rows)
        return {"csv": path.name, "expected": expected, "max_rel_error": worst}
    if family == "sigma":
        funcs = [(im.GainFunction.sigma_power(k, d), im.predicted_sigma_slope(k, d))
                 for k in range(1, d + 1)]
    else:
        e = im.generic_direction(d)
        funcs = [(im.GainFunction.immanant_power(s),
                  im.predicted_immanant_slope(im.p_poly(s, e).degree, d))
                 for s in im.all_specs(d)]
    grid = np.asarray(cfg["m_grid"]) if cfg["m_grid"] else None
    for f, predicted in funcs:
        scan = im.gain_exponent_scan(f, d, grid, fit_points=cfg["fit_points"])
        for m, val in zip(scan.m, scan.integrals):
            long_rows.append({"function": f.label, "dim": d, "m": m, "integral": val})
        summary.append({"function": f.label, "dim": d, "fitted_slope": scan.fitted_slope,
                        "predicted_slope": predicted, "bounded": abs(predicted) < 1e-12,
                        "sphere_rule": scan.rule})
    rp.write_csv(out / "tm_scan.csv", ["function", "dim", "m", "integral"], long_rows)
    path = rp.write_csv(out / "tm_slopes.csv", ["function", "dim", "fitted_slope",
                                                 "predicted_slope", "bounded", "sphere_rule"],
                        summary)
    return {"csv": [path.name, "tm_scan.csv"], "slopes": summary}


def piola_potentials(d, amplitude):
    """Two distinct convex periodic potentials used by the periodic presets."""
    t1 = ci.PeriodicPotential.isotropic(d)
    for i in range(d - 1):
        t1 = t1.with_sin_product(amplitude, i, i + 1)
    q = np.diag(np.linspace(1.4, 0.8, d))
    k = [0] * d
    k[0], k[-1] = 1, 1
    t2 = ci.PeriodicPotential(q).with_cos(amplitude, k)
    return t1, t2


def build_ci_field(cfg):
    case, gen, d = cfg["case"], cfg["generator"], cfg["dim"]
    if case == "periodic":
        geom = fl.torus((cfg["period"],) * d, cfg["n"])
        if gen == "identity":
            return fl.constant(geom, np.eye(d))
        if gen not in ("piola", "piola-sum"):
            raise ValidationError(f"generator {gen!r} is not available for the periodic case")
        t1, t2 = piola_potentials(d, cfg["amplitude"])
        a = ci.generate_periodic_dpt(t1, geom)
        return a + ci.generate_periodic_dpt(t2, geom) if gen == "piola-sum" else a
    if case == "bounded":
        geom = fl.ball(d, cfg["n"], cfg["radius"], cfg["radial_nodes"])
        if gen == "identity":
            return fl.constant(geom, np.eye(d))
        if gen == "tm":
            return sg.tm_field(cfg["m"], geom)
        raise ValidationError(f"generator {gen!r} is not available for the bounded case")
    if d != 2:
        raise ValidationError("slab generators are 1+1 dimensional (dim = 2)")
    geom = fl.slab(cfg["tau"], 1, cfg["half_width"], cfg["nt"], cfg["n"])
    if gen == "free-transport":
        return ci.free_transport_dpt(geom, mass=cfg["mass"], sigma=cfg["sigma"],
                                     thermal=cfg["thermal"], drift=cfg["drift"])
    if gen == "static":
        s = cfg["sigma"]
        return ci.static_embedding_dpt(
            geom, lambda y: cfg["mass"] * np.exp(-y ** 2 / (2 * s * s)) / np.sqrt(2 * np.pi * s * s))
    raise ValidationError(f"generator {gen!r} is not available for the slab case")


def run_ci_check(cfg, out):
    a = build_ci_field(cfg)
    case = cfg["case"]
    if case == "periodic":
        rep = ci.check_periodic(a, cfg["div_tol"])
    elif case == "bounded":
        rep = ci.check_bounded(a)
    else:
        rep = ci.check_slab(a, cfg["decay_tol"], cfg["slack_c"])
    body = rep.to_dict()
    body["provenance"] = a.provenance
    rp.write_json(out / "ci_check.json", rp.envelope(cfg, body, a.geom.to_dict(), a.scheme))
    return body


def read_lambda_csv(path):
    """Samples ``(phi, lambda)``; a bare file name may refer to a bundled preset file."""
    path = Path(path)
    if path.is_file():
        text = path.read_text()
    else:
        bundled = resources.files("dpt") / "presets" / path.name
        if path.parent != Path(".") or not bundled.is_file():
            raise ValidationError(f"lambda file {path} not found")
        text = bundled.read_text()
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    if not rows:
        raise ValidationError(f"{path}: no samples")
    try:
        float(rows[0][0])
    except (ValueError, IndexError):
        rows = rows[1:]
    try:
        data = np.array([[float(x) for x in r[:2]] for r in rows])
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric entry") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValidationError(f"{path}: expected two columns phi, lambda")
    n = len(data)
    expected = 2 * np.pi * np.arange(n) / n
    if not np.allclose(data[:, 0], expected, atol=1e-9):
        raise ValidationError("phi must be the uniform grid 2 pi j / N, j = 0..N-1")
    return data[:, 0], data[:, 1]


def run_minkowski2d(cfg, out):
    if not cfg["lambda_file"]:
        raise ValidationError("--lambda FILE is required")
    phi, lam = read_lambda_csv(cfg["lambda_file"])
    h = sg.support_solve_2d(lam)
    hv = h.evaluate(phi)
    rec = h.radius_of_curvature(phi)
    rows = [{"phi": p, "h": x, "lambda": y, "lambda_recovered": z}
            for p, x, y, z in zip(phi, hv, lam, rec)]
    path = rp.write_csv(out / "minkowski2d.csv", ["phi", "h", "lambda", "lambda_recovered"], rows)
    return {"csv": path.name, "modes": h.modes, "area": sg.singular_det_mass(h),
            "roundtrip_rel_error": float(np.abs(rec - lam).max() / np.abs(lam).max()),
            "convex": h.is_convex()}


def run_wave(cfg, out):
    rng = np.random.default_rng(cfg.seed)
    worst, det_fail, psd_fail, psd_count = 0.0, 0, 0, 0
    for _ in range(cfg["samples"]):
        n = int(rng.integers(1, cfg["max_dim"] + 1))
        s = ph.WaveState(float(rng.normal()), rng.normal(size=n), float(rng.uniform(0.5, 2.0)))
        r = ph.wave_det_identity(s, cfg["tol"])
        scale = float(np.linalg.norm(ph.wave_tensor(s), 2)) ** (n + 1)
        worst = max(worst, abs(r["det_direct"] - r["det_formula"]) / scale)
        det_fail += not r["match"]
        psd = ph.wave_is_psd(s)
        psd_count += psd
        psd_fail += psd != ph.wave_psd_predicted(s)
    body = {"samples": cfg["samples"], "det_max_rel_error": worst, "det_failures": det_fail,
            "psd_criterion_mismatches": psd_fail, "psd_states": psd_count,
            "holds": det_fail == 0 and psd_fail == 0}
    rp.write_json(out / "wave.json", rp.envelope(cfg, body))
    return body


_LAGRANGIANS = {"vacuum": ph.linear_vacuum, "quadratic": ph.quadratic_lagrangian,
                "born-infeld": ph.born_infeld}


def run_maxwell(cfg, out):
    rng = np.random.default_rng(cfg.seed)
    lag = _LAGRANGIANS[cfg["lagrangian"]]()
    worst = {"detS_closed_form": 0.0, "detS_vs_detR": 0.0, "detT_vs_detS2": 0.0}
    fails = skipped = 0
    done = 0
    while done < cfg["samples"]:
        b, e = 0.5 * rng.normal(size=3), 0.5 * rng.normal(size=3)
        try:
            r = ph.maxwell_det_identities(ph.MaxwellState(b, e, lag), cfg["tol"])
        except ValidationError:
            skipped += 1  # outside the admissible set of the Lagrangian
            if skipped > 100 * cfg["samples"]:
                raise
            continue
        done += 1
        fails += not r["holds"]
        for k, v in r["errors"].items():
            worst[k] = max(worst[k], v)
    body = {"samples": done, "lagrangian": lag.name, "max_rel_errors": worst,
            "failures": fails, "skipped_inadmissible": skipped, "holds": fails == 0}
    rp.write_json(out / "maxwell.json", rp.envelope(cfg, body))
    return body


def run_gas(cfg, out):
    rng = np.random.default_rng(cfg.seed)
    worst, fails = 0.0, 0
    for _ in range(cfg["samples"]):
        n = int(rng.integers(1, cfg["max_dim"] + 1))
        q = rng.normal(size=n + 1)
        g = ph.quadratic_energy_gas(q) if cfg["law"] == "quadratic" else ph.gamma_law_gas(cfg["gamma"], q)
        r = ph.godunov_det_identity(g, cfg["tol"])
        scale = max(float(np.linalg.norm(ph.godunov_tensor(g), 2)) ** (n + 1), np.finfo(float).tiny)
        worst = max(worst, abs(r["det_direct"] - r["det_formula"]) / scale)
        fails += not r["match"]
    body = {"samples": cfg["samples"], "law": cfg["law"], "det_max_rel_error": worst,
            "failures": fails, "holds": fails == 0}
    rp.write_json(out / "gas.json", rp.envelope(cfg, body))
    return body


def vlasov_config(cfg):
    params = {}
    if cfg["kernel"] == "exp":
        params = {"strength": cfg["kernel_strength"], "length": cfg["kernel_length"]}
    return vl.VlasovConfig(cfg["half_width"], cfg["vmax"], cfg["ny"], cfg["nv"], cfg["tau"],
                           cfg["kernel"], params, tuple(cfg["components"]), cfg["cfl"],
                           cfg["decay_tol"])


def run_vlasov(cfg, out):
    vcfg = vlasov_config(cfg)
    rec = vl.run(vcfg)
    rows = [{"step": k, "t": t, "mass": m, "momentum": p, "energy": e, "shifted_energy": se,
             "clip_loss": c, "s_min": float(s.min()), "s_max": float(s.max())}
            for k, (t, m, p, e, se, c, s) in enumerate(zip(
                rec.times, rec.mass, rec.momentum, rec.energy, rec.shifted_energy,
                rec.clip_loss, rec.s))]
    rp.write_csv(out / "vlasov_steps.csv", ["step", "t", "mass", "momentum", "energy",
                                            "shifted_energy", "clip_loss", "s_min", "s_max"], rows)
    slab = vl.slab_estimate(rec, cfg["decay_tol"])
    g = vcfg.grid()
    rho, s_last, force = rec.rho[-1], rec.s[-1], rec.force[-1]
    l1 = vl.s_l1_bound_check(rho, (g.y,), rec.final_state.kernel, s_last)
    body = {"diagnostics": rec.diagnostics(), "slab_estimate": slab.to_dict(),
            "s_l1_bound": l1, "steps": len(rec.times) - 1,
            "divergence_identity_defect": vl.divergence_identity_check(rho, s_last, force, (g.y,))}
    if cfg["snapshots"]:
        fl.save_field(vl.assemble_T(rec), out / "T_field")
        np.save(out / "f_final.npy", rec.final_state.f)
        body["snapshots"] = ["T_field.json", "T_field.bin", "f_final.npy"]
    rp.write_json(out / "vlasov_report.json",
                  rp.envelope(cfg, body, {"ny": vcfg.ny, "nv": vcfg.nv, "nt": len(rec.times)},
                              "strang-semi-lagrangian-cubic"))
    return body


RUNNERS = {"immanant": run_immanant, "tm-scan": run_tm_scan, "ci-check": run_ci_check,
           "minkowski2d": run_minkowski2d, "wave": run_wave, "maxwell": run_maxwell,
           "gas": run_gas, "vlasov": run_vlasov}


# -- argument parsing ------------------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--preset", help="named preset shipped with the package")


def build_parser():
    parser = argparse.ArgumentParser(prog="dpt", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="64-bit RNG seed (default 0)")
    parser.add_argument("--threads", type=int, default=None,
                        help="cap on BLAS/LAPACK threads (default: library default)")
    parser.add_argument("--out", default="dpt-out", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("immanant", help="characters, Schur check and deg p for subgroups of S_d")
    _common(p)
    p.add_argument("--degree", type=int)
    p.add_argument("--scan", action="store_true", default=None)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("tm-scan", help="integrals of gain functions along T_m")
    _common(p)
    p.add_argument("--dim", type=int)
    p.add_argument("--family", choices=cfgmod.SCHEMAS["tm-scan"]["family"].choices)

    p = sub.add_parser("ci-check", help="compensated-integrability inequality report")
    _common(p)
    p.add_argument("--case", choices=cfgmod.SCHEMAS["ci-check"]["case"].choices)
    p.add_argument("--generator", choices=cfgmod.SCHEMAS["ci-check"]["generator"].choices)
    p.add_argument("--dim", type=int)
    p.add_argument("--n", type=int)

    p = sub.add_parser("minkowski2d", help="support function from curvature radius samples")
    _common(p)
    p.add_argument("--lambda", dest="lambda_file", help="CSV of (phi, lambda) samples")

    for name in ("wave", "maxwell", "gas"):
        p = sub.add_parser(name, help=f"{name} tensor identity checks on random states")
        _common(p)
        p.add_argument("--check", choices=("identities",))
        p.add_argument("--samples", type=int)
        if name == "maxwell":
            p.add_argument("--lagrangian", choices=cfgmod.SCHEMAS["maxwell"]["lagrangian"].choices)
        if name == "gas":
            p.add_argument("--law", choices=cfgmod.SCHEMAS["gas"]["law"].choices)

    p = sub.add_parser("vlasov", help="kinetic run with the space-time slab estimate")
    _common(p)
    p.add_argument("--ny", type=int)
    p.add_argument("--nv", type=int)
    p.add_argument("--tau", type=float)
    return parser


def resolve_config(args):
    raw = {}
    sources = []
    if args.preset:
        raw.update(cfgmod.load_preset(args.preset))
        sources.append(f"preset:{args.preset}")
    if args.config:
        raw.update(cfgmod.load_file(args.config))
        sources.append(args.config)
    skip = {"command", "config", "preset", "seed", "threads", "out"}
    overrides = {k: v for k, v in vars(args).items() if k not in skip}
    return cfgmod.resolve(args.command, raw, overrides, args.seed, sources)


def execute(args):
    if args.threads is not None and args.threads < 1:
        raise ValidationError("--threads must be >= 1")
    cfg = resolve_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    runner = RUNNERS[args.command]
    if args.threads is None:
        body = runner(cfg, out)
    else:
        from threadpoolctl import threadpool_limits

        with threadpool_limits(limits=args.threads):
            body = runner(cfg, out)
    _require_finite(rp.plain(body))
    return body


def _require_finite(obj, path="result"):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _require_finite(v, f"{path}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _require_finite(v, f"{path}[{i}]")
    elif obj in ("nan", "inf", "-inf"):
        raise NumericalError(f"non-finite value at {path}")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        body = execute(args)
    except ValidationError as exc:
        print(f"dpt: invalid input: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"dpt: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 3
    sys.stdout.write(rp.dumps(body))
    return 0


if __name__ == "__main__":
    sys.exit(main())
