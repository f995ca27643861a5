"""Command-line front end for verification, scanning, probing and synthesis.

Commands:
    verify-group   audit the structural conditions for the configured mode
    analyze        dense wavefront scan with CSV/JSON/gnuplot artifacts
    probe          single-point decay report on stdout
    synthesize     sample the configured signal onto a grid file

Exit codes: 0 ok; 1 singularities found although the config asserted none;
2 a required structural condition failed; 64 configuration error.

Outputs are deterministic: identical (config, seed) produce byte-identical
files regardless of --workers, and every artifact embeds the config hash,
the effective seed and the library version.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import io as cwio
from .config import ConfigError, RunConfig, load_config
from .detector import SINGULAR, classify_point, wavefront_scan
from .objects import synthesize_signal
from .verifier import (
    STRONG_BLOCKED,
    anisotropy_gate,
    check_cone_approx,
    fit_alpha1,
    norm_power_integral,
    stay_measure,
)

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONDITION = 2
EXIT_CONFIG = 64


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors, not condition failures
    def error(self, message):
        raise ConfigError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="conewave", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override run.seed")
        p.add_argument("--out", default=None, help="override run.out directory")
        p.add_argument("--workers", type=int, default=1, help="parallel scan workers")

    p = sub.add_parser("verify-group", help="audit structural conditions")
    common(p)

    p = sub.add_parser("analyze", help="dense wavefront scan")
    common(p)
    p.add_argument("--force", action="store_true", help="skip the verify-group preflight")
    p.add_argument(
        "--permuted-pass",
        action="store_true",
        help="repeat the scan with permuted coordinates to cover excluded directions",
    )

    p = sub.add_parser("probe", help="single-point decay report")
    common(p)
    p.add_argument("x", help="comma-separated position, e.g. 0.0,0.0")
    p.add_argument("xi", help="comma-separated direction, e.g. 1.0,0.0")

    p = sub.add_parser("synthesize", help="sample the configured signal to a grid")
    common(p)
    return parser


def _parse_vector(text: str, what: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise ConfigError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _ensure_out(cfg: RunConfig) -> str:
    os.makedirs(cfg.out_dir, exist_ok=True)
    return cfg.out_dir


# ---------------------------------------------------------------------------
# verify-group
# ---------------------------------------------------------------------------


def _cone_report(verdict) -> dict:
    out = {"mode": verdict.mode, "status": verdict.status, "notes": list(verdict.notes),
           "samples_tested": verdict.samples_tested}
    if verdict.witness is not None:
        w = verdict.witness
        out["witness"] = {
            "eps_prime": w.eps_prime,
            "r_prime": w.r_prime,
            "n": w.n,
            "samples_checked": w.samples_checked,
        }
    if verdict.counterexample is not None:
        ce = verdict.counterexample
        out["counterexample"] = {
            "params": ce.element.params,
            "matrix": ce.element.matrix,
            "xi_prime": ce.xi_prime,
            "image": ce.image,
            "failed_test": ce.failed_test,
            "alpha": ce.alpha,
            "outer_radius": ce.ko_cone.R,
            "inner_radius": ce.ki_cone.R,
        }
    return out


def _verify_report(cfg: RunConfig, group, rng) -> tuple:
    """Run the full condition audit; returns (failures, report dict)."""
    vp = cfg.verify_params(group)
    window = cfg.build_window(group)
    r_fit, r_int, r_cone, r_stay = rng.spawn(4)
    failures = []
    report = {
        "stamp": cfg.stamp(),
        "group": group.spec_dict(),
        "mode": vp["mode"],
        "eps": vp["eps"],
        "radius": vp["radius"],
    }

    gate = anisotropy_gate(group)
    report["gate"] = gate

    if vp["mode"] == "strong" and gate == STRONG_BLOCKED:
        failures.append("strong mode unavailable: the group contains scalar dilations")
        verdict = check_cone_approx(
            group, "strong", vp["patch"], vp["radius"], group.orbit().base_point,
            budget=vp["budget"], v0=window, rng=r_cone,
        )
        report["cone"] = _cone_report(verdict)
    else:
        verdict = check_cone_approx(
            group, vp["mode"], vp["patch"], vp["radius"], group.orbit().base_point,
            budget=vp["budget"], v0=window if vp["mode"] == "strong" else None, rng=r_cone,
        )
        report["cone"] = _cone_report(verdict)
        if verdict.status != "holds":
            failures.append(f"cone approximation search ended with {verdict.status!r}")
        fit_window = window if vp["mode"] == "strong" else None
        try:
            fit = fit_alpha1(
                group, vp["patch"], fit_window or _weak_fit_window(verdict, window),
                vp["radius"], vp["samples"], use_ki=vp["use_ki"], rng=r_fit,
            )
            report["fit"] = {
                "alpha1": fit.alpha1,
                "envelope_c": fit.envelope_c,
                "sample_count": fit.sample_count,
                "used_ki": fit.used_ki,
            }
        except (ValueError, RuntimeError) as exc:
            failures.append(f"envelope fit failed: {exc}")
            report["fit"] = {"error": str(exc)}
        try:
            integral = norm_power_integral(
                group, vp["patch"], window, vp["radius"], vp["alpha2"] or 2.0,
                budget=max(256, vp["budget"]), rng=r_int,
            )
            report["integral"] = {
                "alpha2": vp["alpha2"] or 2.0,
                "value": integral.value,
                "stderr": integral.stderr,
                "stable": integral.stable,
                "note": integral.note,
            }
            if not integral.stable:
                failures.append("norm-power integral is not stable under budget growth")
        except (ValueError, RuntimeError) as exc:
            failures.append(f"integrability check failed: {exc}")
            report["integral"] = {"error": str(exc)}

    try:
        base = group.orbit().base_point
        stays = [stay_measure(group, base, window, rng=r_stay)]
        points = [base]
        for _ in range(max(0, vp["stay_points"] - 1)):
            h, _w = group.sample_chart(1, r_stay, _unit_chart_box(group))
            points.append(h[0].matrix.T @ base)
            stays.append(stay_measure(group, points[-1], window, rng=r_stay))
        worst = 0.0
        for est in stays[1:]:
            comb = math.hypot(stays[0].stderr, est.stderr)
            diff = abs(est.value - stays[0].value)
            if diff <= 1e-9 * max(1.0, abs(stays[0].value)):
                continue  # exact estimators agree to rounding
            worst = max(worst, diff / comb if comb > 0 else math.inf)
        report["stay"] = {
            "values": [e.value for e in stays],
            "stderrs": [e.stderr for e in stays],
            "worst_sigma": worst,
        }
        if worst > 3.0:
            failures.append("stay measure varies along the orbit beyond 3 sigma")
    except (ValueError, RuntimeError, NotImplementedError) as exc:
        failures.append(f"stay measure failed: {exc}")
        report["stay"] = {"error": str(exc)}

    report["failures"] = failures
    report["ok"] = not failures
    return failures, report


def _weak_fit_window(verdict, fallback):
    if verdict.witness is not None:
        return verdict.witness.window
    return fallback


def _unit_chart_box(group):
    """Modest chart box around the identity for drawing orbit points."""
    if group.kind == "similitude":
        return (-0.7, 0.7)
    if group.kind == "diagonal":
        d = group.dim
        return (np.full(d, -0.7), np.full(d, 0.7), [(1,) * d])
    if group.kind == "shearlet":
        return (-0.7, 0.7, np.full(group.dim - 1, 0.5), (1,))
    raise ConfigError(f"group kind {group.kind!r} has no sampling chart")


def cmd_verify_group(cfg: RunConfig, workers: int) -> int:
    group = cfg.build_group()
    failures, report = _verify_report(cfg, group, cfg.rng())
    out = _ensure_out(cfg)
    cwio.write_json(os.path.join(out, "verify_group.json"), report)
    for line in report.get("cone", {}).get("notes", []):
        print(f"note: {line}", file=sys.stderr)
    if report["gate"] == STRONG_BLOCKED and report["mode"] == "strong":
        print(report["gate"], file=sys.stderr)
        print("suggestion: set verify.mode = \"weak\"", file=sys.stderr)
    for f in failures:
        print(f"condition failure: {f}", file=sys.stderr)
    print(f"verify-group: {'ok' if not failures else 'FAILED'} "
          f"(report: {os.path.join(out, 'verify_group.json')})")
    return EXIT_OK if not failures else EXIT_CONDITION


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _scan_directions(dim: int, count: int, rng) -> np.ndarray:
    if dim == 2:
        angles = 2.0 * math.pi * np.arange(count) / count
        return np.stack([np.cos(angles), np.sin(angles)], axis=1)
    u = rng.standard_normal((count, dim))
    return u / np.linalg.norm(u, axis=1, keepdims=True)


def cmd_analyze(cfg: RunConfig, workers: int, force: bool, permuted: bool) -> int:
    group = cfg.build_group()
    rng = cfg.rng()
    r_verify, r_wavelet, r_dirs = rng.spawn(3)
    if not force:
        failures, _report = _verify_report(cfg, group, r_verify)
        if failures:
            for f in failures:
                print(f"condition failure: {f}", file=sys.stderr)
            print("preflight failed; rerun with --force to scan anyway", file=sys.stderr)
            return EXIT_CONDITION
    wavelet = cfg.build_wavelet(group, rng=r_wavelet)
    obj = cfg.build_signal(group.dim)
    det_cfg = cfg.detector_config()
    sp = cfg.scan_params(group.dim)
    cell = (sp["hi"] - sp["lo"]) / sp["n"]
    axes = [sp["lo"][k] + cell[k] * (np.arange(sp["n"]) + 0.5) for k in range(group.dim)]
    directions = _scan_directions(group.dim, sp["directions"], r_dirs)

    scan = wavefront_scan(obj, wavelet, axes, directions, config=det_cfg,
                          permuted_pass=permuted, workers=workers)
    for w in scan.warnings:
        print(f"warning: {w}", file=sys.stderr)

    out = _ensure_out(cfg)
    stamp = cfg.stamp()
    cwio.write_scan_csv(os.path.join(out, "scan.csv"), scan, stamp)
    if group.dim == 2:
        cwio.write_gnuplot_matrix(os.path.join(out, "scan.mat"), scan, stamp)
    cwio.write_json(os.path.join(out, "scan_summary.json"), cwio.scan_summary(scan, stamp))
    if sp["probes"]:
        reports = [classify_point(obj, wavelet, x, xi, config=det_cfg)
                   for x, xi in sp["probes"]]
        cwio.write_decay_csv(os.path.join(out, "decay_reports.csv"), reports, stamp)

    counts = scan.counts()
    print("analyze: " + ", ".join(f"{k}={v}" for k, v in sorted(counts.items())))
    if sp["assert_none"] and counts.get(SINGULAR, 0) > 0:
        print("assertion failed: singular verdicts present", file=sys.stderr)
        return EXIT_ASSERTION
    return EXIT_OK


# ---------------------------------------------------------------------------
# probe and synthesize
# ---------------------------------------------------------------------------


def cmd_probe(cfg: RunConfig, x_text: str, xi_text: str) -> int:
    group = cfg.build_group()
    x = _parse_vector(x_text, "x")
    xi = _parse_vector(xi_text, "xi")
    if x.size != group.dim or xi.size != group.dim:
        raise ConfigError(f"probe arguments must have {group.dim} components")
    if not np.any(xi):
        raise ConfigError("xi: direction must be nonzero")
    wavelet = cfg.build_wavelet(group, rng=cfg.rng())
    obj = cfg.build_signal(group.dim)
    try:
        report = classify_point(obj, wavelet, x, xi, config=cfg.detector_config())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    payload = cwio.decay_report_dict(report)
    payload["stamp"] = cfg.stamp()
    print(json.dumps(cwio.jsonable(payload), sort_keys=True, indent=2))
    return EXIT_OK


def cmd_synthesize(cfg: RunConfig) -> int:
    group = cfg.build_group()
    obj = cfg.build_signal(group.dim)
    sp = cfg.synthesize_params(group.dim)
    signal = synthesize_signal(obj, sp["shape"], sp["spacing"], origin=sp["origin"])
    out = _ensure_out(cfg)
    path = os.path.join(out, "signal.bin")
    cwio.write_field(path, signal.samples, {
        "origin": signal.origin,
        "spacing": signal.spacing,
        "stamp": cfg.stamp(),
    })
    print(f"synthesize: wrote {path} shape={tuple(signal.samples.shape)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config, seed=args.seed, out_dir=args.out)
        if args.command == "verify-group":
            return cmd_verify_group(cfg, args.workers)
        if args.command == "analyze":
            return cmd_analyze(cfg, args.workers, args.force, args.permuted_pass)
        if args.command == "probe":
            return cmd_probe(cfg, args.x, args.xi)
        if args.command == "synthesize":
            return cmd_synthesize(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
