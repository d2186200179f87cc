"""Command-line surface: segment, project, verify, demo, dice.

Exit codes: 0 success (or verdict true), 1 oracle verdict false,
2 usage/parse errors, 3 numerical failure (non-finite energy). Every
command that writes artifacts also writes a flat key=value manifest
recording parameters, input hashes, artifact paths, and wall time.
"""

from __future__ import annotations

import argparse
import hashlib
import sys
import time
from pathlib import Path

import numpy as np

from . import pipeline
from .convexity import isoperimetric_ratio, project_convex, verify_convex
from .pipeline import (
    FeatureFileError,
    PgmError,
    generate_phantom,
    geometry_scene,
    read_feature_file,
    read_image_pgm,
    read_mask_pgm,
    region_variance_feature,
    write_feature_file,
    write_mask_pgm,
    write_overlay,
)
from .regularizer import edge_weight
from .solver import SolverConfig, cs_std_solve, cs_std_solve_multiphase
from .sublevel import sublevel_to_label

FIG5_DELTAS = (0.0, 0.05, 0.15, 0.3)
FIG5_RADII = (25, 25, 25, 25, 1)

#: per-kind demo field sizes; the curvature-floor sweep needs room for the
#: largest-delta run to grow round without touching the border
DEMO_SIZES = {"fig4": 256, "fig5": 384, "nested": 256}


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _fmt(value) -> str:
    if isinstance(value, float):
        return "%.12g" % value
    if isinstance(value, (tuple, list)):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _write_manifest(path, entries: dict) -> None:
    with open(path, "w", encoding="ascii") as fh:
        for key, value in entries.items():
            fh.write(f"{key}={_fmt(value)}\n")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated float list, got {text!r}")


def _radii_list(text: str) -> tuple[int, ...]:
    try:
        radii = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if len(radii) != 5:
        raise argparse.ArgumentTypeError("radius schedule needs exactly 5 entries")
    return radii


def _sniff_format(path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(3)
    if head.startswith(b"P5"):
        return "pgm"
    if head == b"FF1":
        return "ff1"
    raise PgmError(f"unrecognized input format in {path}")


def _load_mask(path) -> np.ndarray:
    kind = _sniff_format(path)
    if kind == "pgm":
        return (read_mask_pgm(path) != 0).astype(int)
    fields = read_feature_file(path)
    if len(fields) != 1:
        raise FeatureFileError("mask input must be a single-channel FF1 file")
    return (fields[0] >= 0.5).astype(int)


def _solve_stack(o_stack: np.ndarray, e: np.ndarray, cfg: SolverConfig):
    """Run the solver and return (stack, trace) regardless of channel count."""
    if o_stack.shape[0] == 1:
        u, trace = cs_std_solve(o_stack[0], e, cfg)
        return u[None], trace
    return cs_std_solve_multiphase(o_stack, e, cfg)


# ---------------------------------------------------------------------------
# segment

def cmd_segment(args) -> int:
    t0 = time.perf_counter()
    entries = {"command": "segment"}
    if (args.input is None) == (args.features is None):
        print("segment: exactly one of --input / --features is required", file=sys.stderr)
        return 2

    if args.input is not None:
        if args.means is None:
            print("segment: --means is required with --input", file=sys.stderr)
            return 2
        image = read_image_pgm(args.input)
        means = args.means
        classes = args.classes if args.classes is not None else len(means)
        if classes != len(means) or classes < 2:
            print("segment: --means must list one mean per class (>= 2)", file=sys.stderr)
            return 2
        o_stack = np.stack(
            [region_variance_feature(image, means[g], means[g + 1]) for g in range(classes - 1)]
        )
        e = edge_weight(image)
        entries["input"] = args.input
        entries["input_sha256"] = _sha256(args.input)
        entries["means"] = means
    else:
        fields = read_feature_file(args.features)
        o_stack = np.stack(fields)
        classes = args.classes if args.classes is not None else len(fields) + 1
        if classes != len(fields) + 1:
            print(
                f"segment: --classes {classes} inconsistent with {len(fields)}-channel features",
                file=sys.stderr,
            )
            return 2
        image = np.full(o_stack.shape[1:], 0.5)
        e = np.ones(o_stack.shape[1:])  # no image: unweighted interface term
        entries["features"] = args.features
        entries["features_sha256"] = _sha256(args.features)

    lambdas = args.lam
    if len(lambdas) == 1 and classes > 2:
        lambdas = lambdas * (classes - 1)
    if len(lambdas) != classes - 1:
        print(f"segment: need {classes - 1} lambdas, got {len(lambdas)}", file=sys.stderr)
        return 2

    cfg = SolverConfig(
        lambdas=lambdas,
        epsilon=args.epsilon,
        sigma=args.sigma,
        radii=args.radii,
        delta=args.delta,
        outer_iters=args.outer,
        inner_iters=args.inner,
        enable_convex=not args.no_convex,
        enable_td=not args.no_td,
    )
    stack, trace = _solve_stack(o_stack, e, cfg)
    if not (trace.is_finite() and np.isfinite(stack).all()):
        print("segment: numerical failure (non-finite energy)", file=sys.stderr)
        return 3

    prefix = args.out_prefix
    paths = {
        "out_sublevel": f"{prefix}_sublevel.ff1",
        "out_labels": f"{prefix}_labels.pgm",
        "out_overlay": f"{prefix}_overlay.ppm",
        "out_trace": f"{prefix}_trace.csv",
    }
    write_feature_file(paths["out_sublevel"], stack)
    write_mask_pgm(paths["out_labels"], sublevel_to_label(stack))
    write_overlay(paths["out_overlay"], image, stack)
    trace.write_csv(paths["out_trace"])

    entries.update(
        classes=classes,
        lambdas=lambdas,
        epsilon=args.epsilon,
        sigma=args.sigma,
        radii=args.radii,
        delta=args.delta,
        outer=args.outer,
        inner=args.inner,
        convex=not args.no_convex,
        td=not args.no_td,
        seed=args.seed,
    )
    entries.update(paths)
    entries["wall_time_s"] = time.perf_counter() - t0
    _write_manifest(f"{prefix}_manifest.txt", entries)
    return 0


# ---------------------------------------------------------------------------
# project

def cmd_project(args) -> int:
    t0 = time.perf_counter()
    kind = _sniff_format(args.input)
    if kind == "pgm":
        raw = read_mask_pgm(args.input)
        u = (raw >= 128).astype(float)
    else:
        fields = read_feature_file(args.input)
        if len(fields) != 1:
            print("project: FF1 input must be single-channel", file=sys.stderr)
            return 2
        u = fields[0]
        if u.min() < 0.0 or u.max() > 1.0:
            print("project: mask values must lie in [0, 1]", file=sys.stderr)
            return 2

    out = project_convex(u, args.radii, args.delta, args.inner)
    prefix = args.out_prefix
    if kind == "pgm":
        out_path = f"{prefix}_projected.pgm"
        write_mask_pgm(out_path, np.round(out * 255).astype(int))
    else:
        out_path = f"{prefix}_projected.ff1"
        write_feature_file(out_path, out)

    _write_manifest(
        f"{prefix}_manifest.txt",
        {
            "command": "project",
            "input": args.input,
            "input_sha256": _sha256(args.input),
            "radii": args.radii,
            "delta": args.delta,
            "inner": args.inner,
            "out_mask": out_path,
            "wall_time_s": time.perf_counter() - t0,
        },
    )
    return 0


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    mask = _load_mask(args.input)
    report = verify_convex(mask, sample_pairs=args.pairs, rng_seed=args.seed)
    for i, comp in enumerate(report.components, start=1):
        print(
            "component %d: area=%d violating_fraction=%.6f isoperimetric=%.4f"
            % (i, comp.area, comp.violating_fraction, comp.isoperimetric)
        )
    print(f"components={report.component_count} verdict={'PASS' if report.verdict else 'FAIL'}")
    return 0 if report.verdict else 1


# ---------------------------------------------------------------------------
# demo

def _demo_variants():
    base = dict(epsilon=0.05, sigma=2.0, radii=(15, 10, 5, 3, 1), outer_iters=10, inner_iters=50)
    return {
        "sigmoid": SolverConfig(
            lambdas=(0.0,), epsilon=1.0, sigma=2.0, outer_iters=1,
            enable_td=False, enable_convex=False,
        ),
        "std": SolverConfig(lambdas=(10.0,), enable_convex=False, **base),
        "csstd": SolverConfig(lambdas=(10.0,), **base),
    }


def _demo_fig4(args, out: Path, entries: dict) -> None:
    image, gt = geometry_scene(args.size, args.seed)
    write_mask_pgm(out / "gt_labels.pgm", gt)
    write_mask_pgm(out / "image.pgm", np.round(np.clip(image, 0, 1) * 255).astype(int))
    o = region_variance_feature(image, pipeline.MEANS_BINARY[0], pipeline.MEANS_BINARY[1])
    e = edge_weight(image)
    entries["phantom_sha256"] = _sha256_bytes(image.tobytes())
    for name, cfg in _demo_variants().items():
        u, trace = cs_std_solve(o, e, cfg)
        mask = (u >= 0.5).astype(int)
        write_mask_pgm(out / f"{name}_mask.pgm", mask * 255)
        write_feature_file(out / f"{name}_soft.ff1", u)
        write_overlay(out / f"{name}_overlay.ppm", image, u)
        trace.write_csv(out / f"{name}_trace.csv")
        report = verify_convex(mask, sample_pairs=10000, rng_seed=args.seed)
        print(
            f"{name}: components={report.component_count} "
            f"oracle={'PASS' if report.verdict else 'FAIL'}"
        )
        entries[f"{name}_oracle"] = "PASS" if report.verdict else "FAIL"


def _demo_fig5(args, out: Path, entries: dict) -> None:
    image, gt = generate_phantom("star", args.size, args.seed)
    write_mask_pgm(out / "gt_labels.pgm", gt)
    o = region_variance_feature(image, pipeline.MEANS_BINARY[0], pipeline.MEANS_BINARY[1])
    e = edge_weight(image)
    entries["phantom_sha256"] = _sha256_bytes(image.tobytes())
    for delta in FIG5_DELTAS:
        # single projection pass per outer step (the solver's fast mode):
        # the sweep output is then the iteration-bounded growth transient,
        # which stays round; long inner loops hit degenerate attractors
        cfg = SolverConfig(
            lambdas=(10.0,), epsilon=0.05, sigma=2.0,
            radii=FIG5_RADII, delta=delta, outer_iters=20, inner_iters=1,
        )
        u, trace = cs_std_solve(o, e, cfg)
        mask = (u >= 0.5).astype(int)
        tag = f"delta_{delta:.2f}"
        write_mask_pgm(out / f"{tag}_mask.pgm", mask * 255)
        write_overlay(out / f"{tag}_overlay.ppm", image, u)
        trace.write_csv(out / f"{tag}_trace.csv")
        ratio = isoperimetric_ratio(mask)
        print(f"{tag}: isoperimetric={ratio:.4f}")
        entries[f"{tag}_isoperimetric"] = ratio


def _demo_nested(args, out: Path, entries: dict) -> None:
    image, gt = generate_phantom("nested_disks", args.size, args.seed)
    write_mask_pgm(out / "gt_labels.pgm", gt)
    write_mask_pgm(out / "image.pgm", np.round(np.clip(image, 0, 1) * 255).astype(int))
    m = pipeline.MEANS_THREE
    o_stack = np.stack(
        [region_variance_feature(image, m[0], m[1]), region_variance_feature(image, m[1], m[2])]
    )
    e = edge_weight(image)
    entries["phantom_sha256"] = _sha256_bytes(image.tobytes())
    cfg = SolverConfig(lambdas=(10.0, 10.0), epsilon=0.05, sigma=2.0, outer_iters=10)
    stack, trace = cs_std_solve_multiphase(o_stack, e, cfg)
    nested_ok = bool(np.all(stack[0] <= stack[1]))
    write_feature_file(out / "sublevel.ff1", stack)
    write_mask_pgm(out / "labels.pgm", sublevel_to_label(stack))
    write_overlay(out / "overlay.ppm", image, stack)
    trace.write_csv(out / "trace.csv")
    print(f"nested chain holds: {nested_ok}")
    entries["nested_ok"] = nested_ok


def cmd_demo(args) -> int:
    t0 = time.perf_counter()
    if args.size is None:
        args.size = DEMO_SIZES[args.kind]
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = {"command": "demo", "kind": args.kind, "size": args.size, "seed": args.seed}
    {"fig4": _demo_fig4, "fig5": _demo_fig5, "nested": _demo_nested}[args.kind](args, out, entries)
    entries["wall_time_s"] = time.perf_counter() - t0
    _write_manifest(out / "manifest.txt", entries)
    return 0


# ---------------------------------------------------------------------------
# dice

def cmd_dice(args) -> int:
    pred = read_mask_pgm(args.pred)
    gt = read_mask_pgm(args.gt)
    if pred.shape != gt.shape:
        print(f"dice: shape mismatch {pred.shape} vs {gt.shape}", file=sys.stderr)
        return 2
    k = args.cls
    value = pipeline.dice((pred <= k).astype(int), (gt <= k).astype(int))
    print(f"{value:.1f}")
    return 0


# ---------------------------------------------------------------------------
# parser wiring

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="csstd",
        description="Variational segmentation with convex-shape projection "
        "and thresholding-dynamics regularization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    seg = sub.add_parser("segment", help="segment an image or a feature stack")
    seg.add_argument("--input", help="input image (PGM P5)")
    seg.add_argument("--features", help="input feature stack (FF1)")
    seg.add_argument("--classes", type=int, help="number of classes L")
    seg.add_argument("--means", type=_float_list, help="per-class intensity means (with --input)")
    seg.add_argument("--lambda", dest="lam", type=_float_list, default=(10.0,),
                     help="regularization weight per channel")
    seg.add_argument("--epsilon", type=float, default=0.05)
    seg.add_argument("--sigma", type=float, default=2.0)
    seg.add_argument("--radii", type=_radii_list, default=(15, 10, 5, 3, 1))
    seg.add_argument("--delta", type=float, default=0.0)
    seg.add_argument("--outer", type=int, default=10)
    seg.add_argument("--inner", type=int, default=50)
    seg.add_argument("--no-convex", action="store_true", help="disable the shape projection")
    seg.add_argument("--no-td", action="store_true", help="disable the interface term")
    seg.add_argument("--out-prefix", required=True)
    seg.add_argument("--seed", type=int, default=0)
    seg.set_defaults(func=cmd_segment)

    proj = sub.add_parser("project", help="convexify a mask")
    proj.add_argument("--input", required=True, help="mask (PGM or single-channel FF1)")
    proj.add_argument("--radii", type=_radii_list, default=(15, 10, 5, 3, 1))
    proj.add_argument("--delta", type=float, default=0.0)
    proj.add_argument("--inner", type=int, default=50)
    proj.add_argument("--out-prefix", required=True)
    proj.set_defaults(func=cmd_project)

    ver = sub.add_parser("verify", help="convexity oracle report for a mask")
    ver.add_argument("--input", required=True)
    ver.add_argument("--pairs", type=int, default=10000)
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)

    demo = sub.add_parser("demo", help="reproduce the toy experiments")
    demo.add_argument("--kind", choices=("fig4", "fig5", "nested"), required=True)
    demo.add_argument("--size", type=int, default=None,
                      help="field size in pixels (default depends on kind)")
    demo.add_argument("--seed", type=int, default=0)
    demo.add_argument("--out-dir", required=True)
    demo.set_defaults(func=cmd_demo)

    dce = sub.add_parser("dice", help="overlap score of two label maps")
    dce.add_argument("--pred", required=True)
    dce.add_argument("--gt", required=True)
    dce.add_argument("--class", dest="cls", type=int, required=True,
                     help="evaluate the k-sublevel mask (label <= k)")
    dce.set_defaults(func=cmd_dice)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FeatureFileError, PgmError, OSError, ValueError) as exc:
        print(f"csstd {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
