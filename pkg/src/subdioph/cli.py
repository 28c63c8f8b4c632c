"""Command-line front end.

Subcommands:
  height      exact squared height of a subspace given an integer basis
  member      integer membership test Y in B by the wedge criterion
  angles      exact vector angle or principal-sine report for two subspaces
  construct-line | construct-blocks | construct-recursive
              build a target from a config file, emit construction JSON with
              predicted exponents and a run manifest
  scan        brute-force best-approximation scan against a constructed
              target: CSV records, JSON summary, figure, manifest
  estimate    constructed-family slope estimate vs the predicted exponent,
              pass/fail at a tolerance
  spectrum-certify
              Jacobian rank certificate for a named exponent family

Exit codes: 0 success, 2 validation failure, 3 precision exhaustion,
4 tolerance-check failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import angles as angles_mod
from . import construct, search, spectrum
from .configio import (
    RunManifest,
    config_echo,
    load_config,
    parse_fraction,
    parse_fraction_list,
    parse_matrix,
)
from .exactlin import membership_by_wedge, saturate
from .numeric import AmbiguousComparison, PrecisionExhausted

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_PRECISION = 3
EXIT_TOLERANCE = 4


def _maybe_file(text: str) -> str:
    """Inline value, or the contents of a file when prefixed with '@'."""
    if text.startswith("@"):
        return Path(text[1:]).read_text().strip()
    return text


def _int_matrix(text: str) -> list[list[int]]:
    rows = parse_matrix(_maybe_file(text))
    out = []
    for r in rows:
        if any(x.denominator != 1 for x in r):
            raise ValueError("integer entries required")
        out.append([int(x) for x in r])
    return out


def _emit(payload: dict, out_dir: Path | None, name: str, manifest: RunManifest | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if out_dir is not None:
        path = out_dir / name
        path.write_text(text)
        if manifest is not None:
            manifest.add_output(path)


# ---------------------------------------------------------------------------
# simple exact commands


def cmd_height(args) -> int:
    basis = _int_matrix(args.basis)
    b = saturate(basis)
    _emit(
        {"heightSq": str(b.height_sq), "subspace": b.to_json_dict()},
        _out_dir(args), "height.json", None,
    )
    return EXIT_OK


def cmd_member(args) -> int:
    basis = _int_matrix(args.basis)
    y = [int(x) for x in parse_fraction_list(_maybe_file(args.y))]
    verdict = membership_by_wedge(y, saturate(basis))
    _emit({"verdict": verdict.value}, _out_dir(args), "member.json", None)
    return EXIT_OK


def cmd_angles(args) -> int:
    if args.a and args.b:
        va = parse_fraction_list(_maybe_file(args.a))
        vb = parse_fraction_list(_maybe_file(args.b))
        sin_sq = angles_mod.angle_of_vectors(va, vb)
        _emit({"sin_sq": str(sin_sq)}, _out_dir(args), "angles.json", None)
        return EXIT_OK
    if args.a_basis and args.b_basis:
        ma = parse_matrix(_maybe_file(args.a_basis))
        mb = parse_matrix(_maybe_file(args.b_basis))
        cfg = angles_mod.PrecisionConfig(working_bits=args.precision_bits)
        report = angles_mod.principal_sines(ma, mb, cfg)
        _emit(report.to_json_dict(), _out_dir(args), "angles.json", None)
        return EXIT_OK
    raise ValueError("provide --a/--b vectors or --a-basis/--b-basis matrices")


# ---------------------------------------------------------------------------
# constructions


def _line_from_config(cp, args) -> construct.LineConstruction:
    sec = cp["construction"]
    return construct.build_line(
        n=sec.getint("n"),
        gamma=parse_fraction_list(sec.get("gamma")),
        theta=sec.getint("theta", 5),
        seed=args.seed if args.seed is not None else sec.getint("seed", 0),
        mode=args.mode or sec.get("mode", "strict"),
        floor_cap=sec.getint("floor_cap", construct.DEFAULT_FLOOR_CAP),
    )


def cmd_construct_line(args) -> int:
    cp = load_config(args.config)
    lc = _line_from_config(cp, args)
    out_dir = _out_dir(args)
    manifest = RunManifest("construct-line", sys.argv[1:], config_echo(cp), lc.digits.seed)
    payload = lc.to_json_dict()
    _emit(payload, out_dir, "construction.json", manifest)
    _write_manifest(out_dir, manifest)
    return EXIT_OK


def cmd_construct_blocks(args) -> int:
    cp = load_config(args.config)
    sec = cp["construction"]
    d = sec.getint("d")
    m = sec.getint("m")
    beta = [parse_fraction_list(sec.get(f"beta{i}")) for i in range(1, d + 1)]
    ext = parse_fraction_list(sec.get("beta_ext")) if sec.get("beta_ext", None) else None
    c2 = parse_fraction(sec.get("c2")) if sec.get("c2", None) else None
    bc = construct.build_blocks(
        d=d, m=m, beta=beta,
        theta=sec.getint("theta", 5),
        seed=args.seed if args.seed is not None else sec.getint("seed", 0),
        mode=args.mode or sec.get("mode", "strict"),
        c2=c2, beta_ext=ext,
        floor_cap=sec.getint("floor_cap", construct.DEFAULT_FLOOR_CAP),
    )
    out_dir = _out_dir(args)
    manifest = RunManifest("construct-blocks", sys.argv[1:], config_echo(cp), bc.seed)
    _emit(bc.to_json_dict(), out_dir, "construction.json", manifest)
    _write_manifest(out_dir, manifest)
    return EXIT_OK


def cmd_construct_recursive(args) -> int:
    cp = load_config(args.config)
    sec = cp["construction"]
    proxies = parse_fraction_list(sec.get("proxies")) if sec.get("proxies", None) else None
    rc = construct.build_recursive(
        n=sec.getint("n"),
        d=sec.getint("d"),
        gamma=parse_fraction_list(sec.get("gamma")),
        theta=sec.getint("theta", 5),
        seed=args.seed if args.seed is not None else sec.getint("seed", 0),
        level=sec.getint("level", 4),
        mode=args.mode or sec.get("mode", "relaxed"),
        proxies=proxies,
        floor_cap=sec.getint("floor_cap", construct.DEFAULT_FLOOR_CAP),
    )
    out_dir = _out_dir(args)
    manifest = RunManifest("construct-recursive", sys.argv[1:], config_echo(cp), sec.getint("seed", 0))
    _emit(rc.to_json_dict(), out_dir, "construction.json", manifest)
    _write_manifest(out_dir, manifest)
    return EXIT_OK


# ---------------------------------------------------------------------------
# scan / estimate


def cmd_scan(args) -> int:
    cp = load_config(args.config)
    lc = _line_from_config(cp, args)
    sec = cp["scan"]
    level = sec.getint("level", 6)
    target = lc.truncated_target(level)
    cfg = search.ScanConfig(
        n=lc.n,
        e=sec.getint("e", 1),
        height_sq_max=sec.getint("height_sq_max"),
        j=sec.getint("j", 1),
        strategy=sec.get("strategy", "auto"),
        workers=args.workers or sec.getint("workers", 1),
        seed=args.seed if args.seed is not None else sec.getint("seed", 0),
        score_floor=float(parse_fraction(sec.get("score_floor", "1"))),
        precision=angles_mod.PrecisionConfig(working_bits=args.precision_bits),
    )
    manifest = RunManifest("scan", sys.argv[1:], config_echo(cp), cfg.seed)
    records = search.best_approx_scan(cfg, target)
    out_dir = _out_dir(args, required=True)
    csv_path = out_dir / "scan.csv"
    csv_path.write_text("\n".join(search.records_to_csv(records)) + "\n")
    manifest.add_output(csv_path)
    if not args.no_plot:
        from . import plotting

        fig_path = out_dir / "scan.png"
        plotting.scan_figure(records, fig_path)
        manifest.add_output(fig_path)
    strategy, complete = search.enumeration_strategy(cfg.n, cfg.e, cfg.strategy)
    summary = {
        "config": config_echo(cp),
        "records": len(records),
        "frontier": sum(1 for r in records if r.on_frontier),
        "estimate_frontier_max": None,
        "truncation_level": level,
        "strategy": strategy,
        "enumeration_complete": complete,
    }
    if len(records) >= 2:
        lo, hi = search.exponent_estimate(records, "frontierMax")
        summary["estimate_frontier_max"] = {"lo": f"{lo:.9f}", "hi": f"{hi:.9f}"}
    _emit(summary, out_dir, "scan_summary.json", manifest)
    _write_manifest(out_dir, manifest)
    return EXIT_OK


def cmd_estimate(args) -> int:
    cp = load_config(args.config)
    lc = _line_from_config(cp, args)
    sec = cp["estimate"]
    e = sec.getint("e", 1)
    n_values = [int(x) for x in sec.get("n_values", "2,3,4,5,6").split(",")]
    tolerance = float(parse_fraction(sec.get("tolerance", "1/10")))
    best_only = sec.getboolean("best_window_only", True)
    predicted = lc.predicted_mu(e)
    if best_only:
        offs = lc.best_window_offsets(e)
        period = lc.schedule.period
        n_values = [n for n in n_values if n % period in offs] or n_values
    records = search.family_records(
        lc, e, n_values, cfg=angles_mod.PrecisionConfig(working_bits=args.precision_bits)
    )
    lo, hi = search.exponent_estimate(records, "familySlope")
    mid = 0.5 * (lo + hi)
    rel_err = abs(mid - float(predicted)) / float(predicted)
    passed = rel_err <= tolerance
    out_dir = _out_dir(args, required=True)
    manifest = RunManifest("estimate", sys.argv[1:], config_echo(cp), lc.digits.seed)
    csv_path = out_dir / "estimate.csv"
    csv_path.write_text("\n".join(search.records_to_csv(records)) + "\n")
    manifest.add_output(csv_path)
    if not args.no_plot:
        from . import plotting

        fig_path = out_dir / "estimate.png"
        plotting.family_figure(records, (lo, hi), float(predicted), fig_path)
        manifest.add_output(fig_path)
    payload = {
        "e": e,
        "n_values": [r.label for r in records],
        "predicted_mu": str(predicted),
        "slope_interval": {"lo": f"{lo:.9f}", "hi": f"{hi:.9f}"},
        "relative_error": f"{rel_err:.6f}",
        "tolerance": str(sec.get("tolerance", "1/10")),
        "passed": passed,
    }
    _emit(payload, out_dir, "estimate.json", manifest)
    _write_manifest(out_dir, manifest)
    return EXIT_OK if passed else EXIT_TOLERANCE


# ---------------------------------------------------------------------------
# spectrum certificates


_FAMILY_NAMES = {"min-angle": "minAngle", "last-angle-d": "lastAngleD", "custom": "custom"}


def cmd_spectrum_certify(args) -> int:
    kind = _FAMILY_NAMES.get(args.family)
    if kind is None:
        raise ValueError(f"unknown family {args.family!r}")
    custom = None
    if kind == "custom":
        custom = [tuple(int(v) for v in pair.split(":")) for pair in args.pairs.split(",")]
    target = spectrum.u_family(kind, args.n, args.d, custom)
    cert = spectrum.rank_certify(target, trials=args.trials, seed=args.seed or 0)
    _emit(cert.to_json_dict(target), _out_dir(args), "certificate.json", None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# wiring


def _out_dir(args, required: bool = False) -> Path | None:
    out = getattr(args, "out", None)
    if out is None:
        if required:
            raise ValueError("--out directory required for this command")
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(out_dir: Path | None, manifest: RunManifest) -> None:
    if out_dir is not None:
        manifest.write(out_dir / "manifest.json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subdioph",
        description="prescribed-exponent subspace constructions, exact heights/angles, brute-force scans",
    )
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--precision-bits", type=int, default=256)
    parser.add_argument("--mode", choices=["strict", "relaxed"], default=None)
    parser.add_argument("--workers", type=int, default=None)
    parser.add_argument("--out", type=str, default=None, help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("height", help="exact squared height from an integer basis")
    p.add_argument("--basis", required=True, help='rows "a,b,c;d,e,f"')
    p.set_defaults(fn=cmd_height)

    p = sub.add_parser("member", help="integer membership by the wedge test")
    p.add_argument("--y", required=True)
    p.add_argument("--basis", required=True)
    p.set_defaults(fn=cmd_member)

    p = sub.add_parser("angles", help="exact vector angle or principal sines")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--a-basis")
    p.add_argument("--b-basis")
    p.set_defaults(fn=cmd_angles)

    for name, fn in [
        ("construct-line", cmd_construct_line),
        ("construct-blocks", cmd_construct_blocks),
        ("construct-recursive", cmd_construct_recursive),
    ]:
        p = sub.add_parser(name, help=f"{name.replace('-', ' ')} from a config file")
        p.add_argument("--config", required=True)
        p.set_defaults(fn=fn)

    p = sub.add_parser("scan", help="brute-force best-approximation scan")
    p.add_argument("--config", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(fn=cmd_scan)

    p = sub.add_parser("estimate", help="family slope vs predicted exponent")
    p.add_argument("--config", required=True)
    p.add_argument("--no-plot", action="store_true")
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("spectrum-certify", help="Jacobian rank certificate for a family")
    p.add_argument("--family", required=True, choices=sorted(_FAMILY_NAMES))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--pairs", default="", help='custom pairs "e:k,e:k"')
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(fn=cmd_spectrum_certify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (construct.ConstructionError, ValueError, FileNotFoundError, KeyError) as exc:
        sys.stderr.write(json.dumps({"error": "validation", "detail": str(exc)}) + "\n")
        return EXIT_VALIDATION
    except (PrecisionExhausted, AmbiguousComparison) as exc:
        sys.stderr.write(json.dumps({"error": "precision", "detail": str(exc)}) + "\n")
        return EXIT_PRECISION


if __name__ == "__main__":
    sys.exit(main())
