"""Command-line pipeline: scan-c, gen-dataset, undersample, recon, eval, preview.

Exit codes: 0 success, 2 runtime failure, 64 usage error.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import dataio
from .errors import EmptyCatalogue, FracsynthError
from .fractal import CCatalogue, GridSpec4, IterationParams, scan_c_catalogue
from .kspace import NufftPlan, density_compensation, golden_angle_trajectory, \
    rss_combine
from .metrics import EdgeProbe, RoiSpec, cnr, metric_record, ssim, \
    temporal_std_es
from .pipeline import PipelineConfig, generate_dataset, regenerate_for_recon
from .recon import CsParams, cs_reconstruct

USAGE_ERROR = 64
RUNTIME_ERROR = 2


class _Parser(argparse.ArgumentParser):
    """argparse with the sysexits-style usage code instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _count_range(text):
    try:
        lo, hi = (int(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}")
    if lo > hi:
        raise argparse.ArgumentTypeError(f"range {text!r} has LO > HI")
    return lo, hi


def build_parser():
    parser = _Parser(prog="fracsynth",
                     description="Synthetic dynamic-MRI training data "
                                 "from quaternion Julia fractals.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("scan-c", help="catalogue structure-rich c parameters")
    p.add_argument("--samples", type=int, default=17,
                   help="grid samples per axis (default 17)")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--range", type=_count_range, default=(10, 30),
                   metavar="LO:HI", help="kept divergence-count band")
    p.add_argument("--out", required=True, help="catalogue JSON path")

    p = sub.add_parser("gen-dataset", help="emit paired training examples")
    p.add_argument("--n", type=int, default=692, help="number of examples")
    p.add_argument("--size", type=int, default=192)
    p.add_argument("--frames", type=int, default=20)
    p.add_argument("--coils", type=int, default=16)
    p.add_argument("--compressed-coils", type=int, default=10)
    p.add_argument("--spokes", type=int, default=13)
    p.add_argument("--samples-per-spoke", type=int, default=0,
                   help="readout samples per spoke (default 2*size)")
    p.add_argument("--max-iter", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--catalogue", default=None,
                   help="catalogue JSON (default: scan inline)")
    p.add_argument("--jobs", type=int,
                   default=int(os.environ.get("FRACSYNTH_JOBS", "1")),
                   help="worker processes (env FRACSYNTH_JOBS)")
    p.add_argument("--out", required=True, help="dataset directory")

    p = sub.add_parser("undersample",
                       help="radially undersample a stored video")
    p.add_argument("--input", required=True, help=".arr video (TxHxW)")
    p.add_argument("--spokes", type=int, default=13)
    p.add_argument("--samples-per-spoke", type=int, default=0)
    p.add_argument("--out", required=True, help="output .arr (c64)")

    p = sub.add_parser("recon", help="reconstruct a stored example")
    p.add_argument("--example", required=True, help="example directory")
    p.add_argument("--method", choices=("adjoint", "cs"), default="adjoint")
    p.add_argument("--cs-lambda", type=float, default=5e-4,
                   help="temporal TV weight (default 5e-4)")
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--out", default=None,
                   help="output directory (default: the example directory)")

    p = sub.add_parser("eval", help="score a reconstruction against its target")
    p.add_argument("--example", required=True)
    p.add_argument("--recon", default=None,
                   help="recon .arr (default example/recon.arr)")
    p.add_argument("--roi", default=None,
                   help="JSON with region_a/region_b/noise rectangles for CNR")
    p.add_argument("--probe", default=None,
                   help="JSON with start/end/n_samples for edge sharpness")
    p.add_argument("--out", default=None, help="metrics JSON path")

    p = sub.add_parser("preview", help="render an .arr video to PNG frames")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--gif", action="store_true", help="also write video.gif")
    return parser


def cmd_scan_c(args):
    grid = GridSpec4(nx=args.samples, ny=args.samples, nz=args.samples,
                     nt=args.samples)
    try:
        cat = scan_c_catalogue(grid, IterationParams(max_iter=args.max_iter),
                               args.range)
    except EmptyCatalogue as exc:
        print(f"error: {exc}", file=sys.stderr)
        print("hint: raise --samples for a finer grid or widen --range",
              file=sys.stderr)
        return RUNTIME_ERROR
    cat.save(args.out)
    print(f"catalogue: {len(cat.entries)} qualifying c values "
          f"(band [{cat.lo}, {cat.hi}], scan {args.samples}^4) -> {args.out}")
    return 0


def cmd_gen_dataset(args):
    cfg = PipelineConfig(
        size=args.size, frames=args.frames, coils=args.coils,
        compressed_coils=args.compressed_coils, spokes_per_frame=args.spokes,
        samples_per_spoke=args.samples_per_spoke, max_iter=args.max_iter,
    )
    if args.catalogue:
        catalogue = CCatalogue.load(args.catalogue)
    else:
        print("scanning c catalogue (17^4 default grid)...")
        from .pipeline import default_scan_catalogue

        catalogue = default_scan_catalogue(max_iter=args.max_iter)
    start = time.perf_counter()

    def progress(index, record, elapsed):
        print(f"example {index:06d}: {elapsed:.2f} s "
              f"(c count {record['c_count']}, "
              f"retained energy {record['retained_energy']:.4f})")

    manifest = generate_dataset(cfg, args.n, args.seed, catalogue, args.out,
                                jobs=max(1, args.jobs), progress=progress)
    total = time.perf_counter() - start
    split = manifest["split"]
    if split:
        print(f"split: {len(split['train'])}/{len(split['val'])}/"
              f"{len(split['test'])} train/val/test")
    print(f"total: {args.n} examples in {total:.1f} s "
          f"({total / args.n:.2f} s/example) -> {args.out}")
    return 0


def cmd_undersample(args):
    video = dataio.read_array(args.input)
    if video.ndim != 3:
        print("error: expected a TxHxW video", file=sys.stderr)
        return RUNTIME_ERROR
    t, h, w = video.shape
    if h != w:
        print("error: frames must be square", file=sys.stderr)
        return RUNTIME_ERROR
    video = video.astype(np.complex128)
    r = args.samples_per_spoke if args.samples_per_spoke else 2 * h
    traj = golden_angle_trajectory(t, args.spokes, r, h)
    plan = NufftPlan(h)
    dcf = density_compensation(traj, plan)
    out = np.empty_like(video)
    for ti in range(t):
        coords = traj.frame_coords(ti)
        out[ti] = plan.adjoint(plan.forward(video[ti], coords), coords,
                               dcf.frame(ti))
    dataio.write_array(out.astype(np.complex64), args.out)
    print(f"undersampled {args.input} at {args.spokes} spokes/frame -> {args.out}")
    return 0


def cmd_recon(args):
    outdir = args.out or args.example
    os.makedirs(outdir, exist_ok=True)
    inp, target, meta = dataio.read_example(args.example)
    trace = None
    if args.method == "adjoint":
        recon = rss_combine(inp.astype(np.complex128))
    else:
        state = regenerate_for_recon(meta)
        params = CsParams(lam=args.cs_lambda, n_iters=args.iters)
        x, trace = cs_reconstruct(state["radial"], state["virtual_maps"],
                                  state["traj"], params, state["plan"])
        recon = np.abs(x)
    peak = recon.max()
    if peak > 0:
        recon = recon / peak
    dataio.write_array(recon.astype(np.float32), os.path.join(outdir, "recon.arr"))
    score = ssim(recon.astype(np.float64), target.astype(np.float64))
    report = {
        "method": args.method,
        "ssim_vs_target": metric_record("ssim", score),
    }
    if trace is not None:
        report["cs"] = {"lambda": args.cs_lambda, "iters": args.iters,
                        "objective_trace": trace}
    dataio.dump_json(report, os.path.join(outdir, "metrics.json"))
    print(f"{args.method} recon of {args.example}: SSIM {score:.4f}")
    return 0


def _load_roi(path, shape):
    import json

    with open(path, encoding="utf-8") as fh:
        spec = json.load(fh)

    def rect_mask(rect):
        m = np.zeros(shape, dtype=bool)
        y0, x0, y1, x1 = rect
        m[y0:y1, x0:x1] = True
        return m

    return RoiSpec(region_a=rect_mask(spec["region_a"]),
                   region_b=rect_mask(spec["region_b"]),
                   noise=rect_mask(spec["noise"]))


def cmd_eval(args):
    recon_path = args.recon or os.path.join(args.example, "recon.arr")
    recon = dataio.read_array(recon_path).astype(np.float64)
    _, target, _ = dataio.read_example(args.example)
    records = [metric_record("ssim", ssim(recon, target.astype(np.float64)))]
    if args.roi:
        roi = _load_roi(args.roi, recon.shape[1:])
        records.append(metric_record("cnr", cnr(recon, roi)))
    if args.probe:
        import json

        with open(args.probe, encoding="utf-8") as fh:
            spec = json.load(fh)
        probe = EdgeProbe(start=tuple(spec["start"]), end=tuple(spec["end"]),
                          n_samples=spec.get("n_samples", 64),
                          pixel_spacing=spec.get("pixel_spacing", 1.0))
        res = temporal_std_es(recon, probe)
        records.append(metric_record(
            "temporal_std_es", res.std,
            params={"per_frame": list(res.values)},
            excluded_frames=res.excluded_frames))
    for rec in records:
        print(f"{rec['metric']}: {rec['value']:.6f}")
    if args.out:
        dataio.dump_json(records, args.out)
    return 0


def cmd_preview(args):
    from PIL import Image

    video = dataio.read_array(args.input)
    if np.iscomplexobj(video):
        video = np.abs(video)
    if video.ndim != 3:
        print("error: expected a TxHxW video", file=sys.stderr)
        return RUNTIME_ERROR
    os.makedirs(args.out, exist_ok=True)
    frames = []
    for t in range(video.shape[0]):
        gray = np.clip(video[t], 0.0, 1.0)
        img = Image.fromarray((gray * 255.0).round().astype(np.uint8), mode="L")
        img.save(os.path.join(args.out, f"frame_{t:03d}.png"))
        frames.append(img)
    if args.gif:
        frames[0].save(os.path.join(args.out, "video.gif"), save_all=True,
                       append_images=frames[1:], duration=100, loop=0)
    print(f"wrote {video.shape[0]} frames to {args.out}")
    return 0


_COMMANDS = {
    "scan-c": cmd_scan_c,
    "gen-dataset": cmd_gen_dataset,
    "undersample": cmd_undersample,
    "recon": cmd_recon,
    "eval": cmd_eval,
    "preview": cmd_preview,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FracsynthError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
