"""Command-line entry point.

Subcommands: visibility, occupancy, augment, bev, bench.  Exit codes: 0 on
success, 1 on usage errors, 2 on data errors.  All stdout is line-oriented
key=value so CI can assert on it.
"""

import argparse
import glob
import sys

import numpy as np

from . import __version__, io
from .augment import MODES, augment_scene, read_virtual_object
from .bench import run_bench
from .bev import bev_slice_render, occupancy_to_bev, visibility_to_bev
from .config import load_config_or_default
from .errors import ConfigError, ParseError
from .occupancy import OccupancyGrid, build_temporal_occupancy
from .raycast import VisibilityVolume, compute_visibility, default_workers

_POSE_MATCH_TOL_S = 1e-6


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; this CLI reserves 2 for
    # data errors and uses 1 for usage
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="voxelvis",
                     description="LiDAR visibility raycasting engine")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("visibility", parents=[], help="per-sweep visibility volume")
    p.add_argument("--sweep", required=True, help="input sweep (.vswp binary or .txt)")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", required=True, help="output VVOL path")
    p.add_argument("--workers", type=int, default=default_workers())

    p = sub.add_parser("occupancy", help="fuse sweeps into a posterior grid")
    p.add_argument("--sweeps", required=True, help="glob of sweep files, filename order")
    p.add_argument("--poses", required=True, help="pose file: timestamp tx ty tz qw qx qy qz")
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", required=True, help="output OVOL path")

    p = sub.add_parser("augment", help="insert virtual objects into a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--objects", required=True, nargs="+",
                   help="object VSWP files (each with a .meta sidecar)")
    p.add_argument("--mode", required=True, choices=MODES)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--out", required=True, help="output sweep path")
    p.add_argument("--report", help="write the augmentation report here")

    p = sub.add_parser("bev", help="export a volume as a multi-channel BEV map")
    p.add_argument("--in", dest="input", required=True, help="VVOL or OVOL file")
    p.add_argument("--out", required=True, help="output BEVF path")
    p.add_argument("--render-channel", type=int,
                   help="also render this channel as PGM")
    p.add_argument("--render-out", help="PGM path for --render-channel")

    p = sub.add_parser("bench", help="time visibility over a synthetic sweep")
    p.add_argument("--points", type=int, default=30_000)
    p.add_argument("--iters", type=int, default=50)
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--workers", type=int, default=default_workers())
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--impl", choices=("auto", "compiled", "python"), default="auto")
    return parser


def _cmd_visibility(args) -> int:
    cfg = load_config_or_default(args.config)
    sweep = io.read_sweep(args.sweep)
    vol = compute_visibility(sweep, cfg.grid, args.workers)
    io.write_vvol(vol.states, cfg.grid, args.out)
    unknown, free, occupied = vol.census()
    print(f"unknown={unknown} free={free} occupied={occupied}")
    return 0


def _cmd_occupancy(args) -> int:
    cfg = load_config_or_default(args.config)
    paths = sorted(glob.glob(args.sweeps))
    if not paths:
        raise ParseError(f"no sweep files match {args.sweeps!r}")
    sweeps = [io.read_sweep(p) for p in paths]
    stamps = [s.timestamp for s in sweeps]
    if any(b < a for a, b in zip(stamps, stamps[1:])):
        raise ValueError(f"sweep timestamps are not in order: {stamps}")
    pose_table = io.read_poses(args.poses)
    poses = []
    for path, sweep in zip(paths, sweeps):
        match = [p for ts, p in pose_table
                 if abs(ts - sweep.timestamp) <= _POSE_MATCH_TOL_S]
        if not match:
            raise ValueError(f"no pose within {_POSE_MATCH_TOL_S}s of sweep "
                             f"{path} (t={sweep.timestamp})")
        poses.append(match[0])
    grid = build_temporal_occupancy(sweeps, poses, cfg.grid, cfg.occupancy)
    io.write_ovol(grid.logodds, cfg.grid, args.out)
    print(f"sweeps={len(sweeps)} out={args.out}")
    return 0


def _cmd_augment(args) -> int:
    cfg = load_config_or_default(args.config)
    scene = io.read_sweep(args.scene)
    objects = [read_virtual_object(p) for p in args.objects]
    out_sweep, report = augment_scene(scene, objects, args.mode, cfg.grid,
                                      cfg.cull_drop_fraction)
    io.write_sweep(out_sweep, args.out)
    if args.report:
        with open(args.report, "w") as f:
            f.write(report.to_text())
    print(f"mode={args.mode} points_out={len(out_sweep)} "
          f"objects_dropped={len(report.objects_dropped)} "
          f"scene_points_removed={report.scene_points_removed}")
    return 0


def _cmd_bev(args) -> int:
    with open(args.input, "rb") as f:
        magic = f.read(4)
    if magic == b"VVOL":
        states, config = io.read_vvol(args.input)
        bev = visibility_to_bev(VisibilityVolume(config, states))
    elif magic == b"OVOL":
        logodds, config = io.read_ovol(args.input)
        bev = occupancy_to_bev(OccupancyGrid(config, logodds.astype(np.float64)))
    else:
        raise ParseError(f"{args.input}: bad magic {magic!r}, expected VVOL or OVOL",
                         offset=0)
    io.write_bevf(bev.values, args.out)
    if (args.render_channel is None) != (args.render_out is None):
        raise ValueError("--render-channel and --render-out must be given together")
    if args.render_channel is not None:
        bev_slice_render(bev, args.render_channel, args.render_out)
    print(f"width={bev.width} height={bev.height} channels={bev.channels}")
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config_or_default(args.config)
    result = run_bench(args.points, args.iters, cfg.grid, args.workers,
                       args.seed, args.impl)
    print(result.summary_line())
    return 0


_COMMANDS = {
    "visibility": _cmd_visibility,
    "occupancy": _cmd_occupancy,
    "augment": _cmd_augment,
    "bev": _cmd_bev,
    "bench": _cmd_bench,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ConfigError, ValueError, OSError) as exc:
        print(f"voxelvis {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
