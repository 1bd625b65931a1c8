"""Command-line toolkit: simulate, enhance, decode, measure, analyze.

Commands are deterministic given their inputs, flags, and seed.  A config
file of key=value lines (keys match the long flag names) supplies defaults;
explicit flags override it.  All commands exit 0 only when no error path
was taken.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import bitstream, metrics, pipeline, stats, surrogate, synthetic
from .cloud import PointCloud, sort_by_morton, rgb_to_ycbcr, ycbcr_to_rgb
from .ply import read_ply, write_ply

QP_DEFAULT = "51,46,40,34,28,22"
MODES_DEFAULT = "bwf,ciwf,vcwf"

RATE_HEADER = (
    "qp", "total_bits", "total_points", "bpop",
    "psnr_c1", "psnr_c2", "psnr_c3", "psnr_weighted",
)
FRAME_HEADER = (
    "frame", "n_points", "residual_bits", "enhancement_bits", "total_bits",
    "bpop", "psnr_c1", "psnr_c2", "psnr_c3", "psnr_weighted",
    "sse_c1", "sse_c2", "sse_c3",
)


class CliError(Exception):
    pass


def _read_frames(directory) -> list:
    paths = sorted(Path(directory).glob("*.ply"))
    if not paths:
        raise CliError(f"no .ply frames in {directory}")
    return [read_ply(p) for p in paths]


def _write_frames(directory, clouds) -> list:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, cloud in enumerate(clouds):
        path = directory / f"frame_{i:04d}.ply"
        write_ply(path, cloud)
        paths.append(path)
    return paths


def _parse_int_list(text: str) -> list:
    return [int(tok) for tok in str(text).split(",") if tok != ""]


def _frame_quality(original: PointCloud, candidate: PointCloud):
    orig = sort_by_morton(original)
    cand = sort_by_morton(candidate)
    sses = [
        float(np.sum((orig.colors[:, c].astype(np.float64)
                      - cand.colors[:, c].astype(np.float64)) ** 2))
        for c in range(3)
    ]
    psnrs = [metrics.psnr_from_sse(s, orig.n) for s in sses]
    return sses, psnrs


def _metrics_rows(originals, candidates, residual_bits, enhancement_bits):
    rows = []
    totals = {"bits": 0.0, "points": 0, "sse": np.zeros(3)}
    for i, (orig, cand) in enumerate(zip(originals, candidates)):
        sses, psnrs = _frame_quality(orig, cand)
        total = residual_bits[i] + enhancement_bits[i]
        rows.append([
            i, orig.n, residual_bits[i], enhancement_bits[i], total,
            total / orig.n,
            psnrs[0], psnrs[1], psnrs[2],
            metrics.weighted_psnr(*psnrs),
            sses[0], sses[1], sses[2],
        ])
        totals["bits"] += total
        totals["points"] += orig.n
        totals["sse"] += np.asarray(sses)
    return rows, totals


def _rate_point_row(qp, totals, extra_bits: float = 0.0):
    total_bits = totals["bits"] + extra_bits
    count = totals["points"]
    psnrs = [metrics.psnr_from_sse(float(s), count) for s in totals["sse"]]
    return [
        qp, total_bits, count, total_bits / count,
        psnrs[0], psnrs[1], psnrs[2], metrics.weighted_psnr(*psnrs),
    ]


def _simulate_one_qp(originals, qp, out_dir):
    cfg = surrogate.QuantizerConfig(qp=qp)
    recons = []
    bits = []
    reference = None
    for i, frame in enumerate(originals):
        frame = sort_by_morton(frame)
        if i == 0:
            recon = surrogate.intra_code(frame, cfg)
            frame_bits = surrogate.intra_bits(frame, cfg)
        else:
            recon, frame_bits, _ = surrogate.inter_code(frame, reference, cfg)
        recons.append(recon)
        bits.append(frame_bits)
        reference = recon
    _write_frames(Path(out_dir) / "recon", recons)
    rows, totals = _metrics_rows(originals, recons, bits, [0.0] * len(bits))
    metrics.write_csv(Path(out_dir) / "bits.csv", FRAME_HEADER, rows)
    return recons, bits, totals


def cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.synthetic:
        seq = synthetic.generate_sequence(
            n_frames=args.synthetic, seed=args.seed, size=args.size,
            gof_size=args.gof,
        )
        originals = [sort_by_morton(f) for f in seq.frames]
        _write_frames(out / "original", originals)
    elif args.input:
        originals = _read_frames(args.input)
    else:
        raise CliError("simulate needs --in or --synthetic")
    rate_rows = []
    for qp in _parse_int_list(args.qp):
        _, _, totals = _simulate_one_qp(originals, qp, out / f"qp{qp:02d}")
        rate_rows.append(_rate_point_row(qp, totals))
    metrics.write_csv(out / "rate_points.csv", RATE_HEADER, rate_rows)
    print(f"simulated {len(originals)} frames at qp {args.qp} -> {out}")
    return 0


def _enhance_one(originals, recons, qp, mode, gof, out_dir, residual_bits,
                 timing=False):
    t0 = time.perf_counter()
    result = pipeline.enhance_sequence(originals, recons, qp=qp, mode=mode,
                                       gof_size=gof)
    encode_seconds = time.perf_counter() - t0
    payload_bytes = bitstream.serialize(result.header, result.payloads)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_frames(out_dir / "filtered", result.frames)
    (out_dir / "payload.pcwf").write_bytes(payload_bytes)
    enhancement_bits = [
        bitstream.payload_bit_count(p) for p in result.payloads
    ]
    rows, totals = _metrics_rows(
        originals, result.frames, residual_bits, enhancement_bits
    )
    metrics.write_csv(out_dir / "metrics.csv", FRAME_HEADER, rows)
    if timing:
        print(f"timing: mode={mode} qp={qp} encode_s={encode_seconds:.4f}")
    return result, totals, encode_seconds


def _residual_bits_from_csv(path, n_frames) -> list:
    header, rows = metrics.read_csv(path)
    column = header.index("residual_bits")
    bits = [float(row[column]) for row in rows]
    if len(bits) != n_frames:
        raise CliError(
            f"{path} holds {len(bits)} frames, expected {n_frames}"
        )
    return bits


def cmd_enhance(args) -> int:
    originals = _read_frames(args.input)
    recons = _read_frames(args.recon)
    if len(originals) != len(recons):
        raise CliError("original and reconstructed frame counts differ")
    qps = _parse_int_list(args.qp)
    if len(qps) != 1:
        raise CliError("enhance takes a single --qp per invocation")
    residual = (
        _residual_bits_from_csv(args.bits, len(originals))
        if args.bits else [0.0] * len(originals)
    )
    result, _, _ = _enhance_one(
        originals, recons, qps[0], args.mode, args.gof, args.out, residual,
        timing=args.timing,
    )
    if args.payload:
        payload_bytes = bitstream.serialize(result.header, result.payloads)
        Path(args.payload).write_bytes(payload_bytes)
    print(f"enhanced {len(originals)} frames (mode={args.mode}, qp={qps[0]}) "
          f"-> {args.out}")
    return 0


def cmd_decode(args) -> int:
    recons = _read_frames(args.recon)
    data = Path(args.payload).read_bytes()
    header, payloads = bitstream.parse(data)
    t0 = time.perf_counter()
    frames = pipeline.decode_replay(recons, payloads, header)
    decode_seconds = time.perf_counter() - t0
    _write_frames(args.out, frames)
    if args.timing:
        print(f"timing: decode_s={decode_seconds:.4f}")
    print(f"decoded {len(frames)} frames (mode={header.mode}, "
          f"qp={header.qp}) -> {args.out}")
    return 0


def _load_rate_points(path):
    header, rows = metrics.read_csv(path)
    def column(name):
        return header.index(name)
    curves = {}
    for component in ("psnr_c1", "psnr_c2", "psnr_c3", "psnr_weighted"):
        curves[component] = [
            metrics.RatePoint(bpop=float(r[column("bpop")]),
                              psnr=float(r[column(component)]))
            for r in rows
        ]
    return curves


def _bdrate_table(anchor_csv, test_csv):
    anchor = _load_rate_points(anchor_csv)
    test = _load_rate_points(test_csv)
    table = []
    for component, label in (
        ("psnr_c1", "c1"), ("psnr_c2", "c2"), ("psnr_c3", "c3"),
        ("psnr_weighted", "weighted"),
    ):
        value = metrics.bd_rate(anchor[component], test[component])
        table.append([label, value])
    return table


def cmd_bdrate(args) -> int:
    table = _bdrate_table(args.anchor, args.test)
    for label, value in table:
        print(f"bd-rate {label}: {value:+.2f}%")
    if args.out:
        metrics.write_csv(args.out, ("component", "bd_rate_percent"), table)
    return 0


def cmd_analyze(args) -> int:
    cloud = read_ply(args.input)
    rows = stats.wss_report(cloud, depth=args.depth, m=args.subblocks)
    Path(args.out).write_text(stats.render_wss_csv(rows))
    print(f"wrote stationarity report ({len(rows)} rows) -> {args.out}")
    return 0


def cmd_convert(args) -> int:
    cloud = read_ply(args.input, scale=args.scale,
                     offset=tuple(float(v) for v in args.offset.split(",")))
    channels = cloud.colors
    if args.direction == "rgb-to-ycbcr":
        converted = rgb_to_ycbcr(channels[:, 0], channels[:, 1], channels[:, 2])
    else:
        converted = ycbcr_to_rgb(channels[:, 0], channels[:, 1], channels[:, 2])
    write_ply(args.out, cloud.with_colors(converted), ascii=args.ascii)
    print(f"converted {cloud.n} points ({args.direction}) -> {args.out}")
    return 0


def cmd_demo(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    qps = _parse_int_list(args.qp)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    seq = synthetic.generate_sequence(
        n_frames=args.frames, seed=args.seed, size=args.size,
        gof_size=args.gof,
    )
    originals = [sort_by_morton(f) for f in seq.frames]
    _write_frames(out / "original", originals)
    anchor_rows = []
    per_qp = {}
    anchor_seconds = 0.0
    for qp in qps:
        t0 = time.perf_counter()
        recons, residual, totals = _simulate_one_qp(
            originals, qp, out / f"qp{qp:02d}"
        )
        anchor_seconds += time.perf_counter() - t0
        per_qp[qp] = (recons, residual)
        anchor_rows.append(_rate_point_row(qp, totals))
    metrics.write_csv(out / "anchor_rate_points.csv", RATE_HEADER, anchor_rows)
    violations = []
    mode_seconds = {}
    for mode in modes:
        rate_rows = []
        mode_seconds[mode] = 0.0
        for qp in qps:
            recons, residual = per_qp[qp]
            run_dir = out / mode / f"qp{qp:02d}"
            result, totals, encode_s = _enhance_one(
                originals, recons, qp, mode, args.gof, run_dir, residual,
                timing=args.timing,
            )
            mode_seconds[mode] += encode_s
            rate_rows.append(
                _rate_point_row(qp, totals, extra_bits=8 * bitstream.HEADER_BYTES)
            )
            for frame_index, decisions in enumerate(result.decisions):
                for set_id, decision in decisions.items():
                    selected = min(decision.cost_filtered,
                                   decision.cost_unfiltered)
                    if selected > decision.cost_unfiltered:
                        violations.append(
                            f"rd violation mode={mode} qp={qp} "
                            f"frame={frame_index} set={set_id}"
                        )
            decoded = pipeline.decode_replay(recons, result.payloads,
                                             result.header)
            decode_dir = out / mode / f"qp{qp:02d}" / "decoded"
            _write_frames(decode_dir, decoded)
            filtered_dir = out / mode / f"qp{qp:02d}" / "filtered"
            for i in range(len(decoded)):
                name = f"frame_{i:04d}.ply"
                if (decode_dir / name).read_bytes() != (
                    filtered_dir / name
                ).read_bytes():
                    violations.append(
                        f"round-trip mismatch mode={mode} qp={qp} frame={i}"
                    )
        metrics.write_csv(out / f"{mode}_rate_points.csv", RATE_HEADER, rate_rows)
        table = _bdrate_table(out / "anchor_rate_points.csv",
                              out / f"{mode}_rate_points.csv")
        metrics.write_csv(out / f"bdrate_{mode}.csv",
                          ("component", "bd_rate_percent"), table)
        summary = ", ".join(f"{label} {value:+.2f}%" for label, value in table)
        print(f"bd-rate[{mode} vs anchor]: {summary}")
    if args.timing:
        for mode in modes:
            ratio = metrics.complexity_ratio(
                anchor_seconds + mode_seconds[mode], anchor_seconds
            )
            print(f"timing: mode={mode} encode_ratio={ratio:.0f}% "
                  f"(anchor_s={anchor_seconds:.3f}, "
                  f"enhance_s={mode_seconds[mode]:.3f})")
    if violations:
        for line in violations:
            print(f"error: {line}", file=sys.stderr)
        return 1
    print(f"demo complete: round-trip and rd-gate checks passed -> {out}")
    return 0


def _expand_config(argv: list) -> list:
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise CliError("--config needs a file argument")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2:]
    tokens = []
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CliError(f"config line without '=': {line!r}")
        key, value = key.strip(), value.strip()
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                tokens.append(f"--{key}")
        else:
            tokens.extend([f"--{key}", value])
    if not rest:
        return tokens
    # Config-derived tokens go right after the subcommand so that explicit
    # flags, parsed later, win.
    return rest[:1] + tokens + rest[1:]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pcwf",
        description="Wiener-filter quality enhancement toolkit for voxelized "
                    "point-cloud color attributes",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value defaults file")
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap (outputs are thread-count independent)")

    p = sub.add_parser("simulate", help="surrogate-codec reconstruction sweep")
    common(p)
    p.add_argument("--in", dest="input", help="directory of original PLY frames")
    p.add_argument("--synthetic", type=int, default=0,
                   help="generate this many synthetic frames instead of --in")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--size", type=int, default=16,
                   help="synthetic cube edge length")
    p.add_argument("--qp", default=QP_DEFAULT, help="comma-separated QP list")
    p.add_argument("--gof", type=int, default=8)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("enhance", help="estimate, gate, and filter a sequence")
    common(p)
    p.add_argument("--in", dest="input", required=True,
                   help="directory of original PLY frames")
    p.add_argument("--recon", required=True,
                   help="directory of reconstructed PLY frames")
    p.add_argument("--qp", required=True)
    p.add_argument("--mode", choices=bitstream.MODES, default="vcwf")
    p.add_argument("--gof", type=int, default=8)
    p.add_argument("--out", required=True)
    p.add_argument("--payload", help="also write the payload to this path")
    p.add_argument("--bits", help="bits.csv from simulate, for BPOP accounting")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_enhance)

    p = sub.add_parser("decode", help="replay a payload against reconstructions")
    common(p)
    p.add_argument("--recon", required=True)
    p.add_argument("--payload", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("bdrate", help="BD-rate between two rate_points CSVs")
    common(p)
    p.add_argument("--anchor", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bdrate)

    p = sub.add_parser("analyze", help="octree/subblock stationarity report")
    common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--subblocks", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("convert", help="RGB<->YCbCr color-space conversion")
    common(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--direction", choices=("rgb-to-ycbcr", "ycbcr-to-rgb"),
                   default="rgb-to-ycbcr")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--offset", default="0,0,0")
    p.add_argument("--ascii", action="store_true")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser(
        "demo",
        help="simulate -> enhance -> decode -> bdrate, with self-checks",
    )
    common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--frames", type=int, default=8)
    p.add_argument("--size", type=int, default=16)
    p.add_argument("--gof", type=int, default=8)
    p.add_argument("--qp", default=QP_DEFAULT)
    p.add_argument("--modes", default=MODES_DEFAULT)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _expand_config(argv)
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
