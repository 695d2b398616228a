"""Command line pipeline: PNM image -> luminance -> pyramid -> heights -> STL.

Exit codes: 0 success, 1 usage, 2 input parse, 3 config, 4 geometry, 5 I/O.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import heightmap, luminance, mesh, slicer, stl, wavelet

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_CONFIG, EXIT_GEOMETRY, EXIT_IO = range(6)


class UsageError(Exception):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    input: Path
    output: Path
    kernel: str = "haar"
    rounds: int = 2
    zmin: float = 2.0
    zmax: float = 10.0
    base: float = 0.5
    invert: bool = False
    threshold: tuple[float, float, float] | None = None
    sx: float = 1.0
    sy: float = 1.0
    format: str = "binary"
    slice_dz: float | None = None
    slice_dir: Path | None = None
    name: str = "relief"

    def check(self):
        if self.kernel not in ("haar", "d4"):
            raise ConfigError(f"kernel must be haar or d4, got {self.kernel!r}")
        if self.format not in ("ascii", "binary"):
            raise ConfigError(f"format must be ascii or binary, got {self.format!r}")
        if self.rounds < 0:
            raise ConfigError(f"--rounds must be >= 0, got {self.rounds}")
        if not self.zmax > self.zmin:
            raise ConfigError(f"--zmax ({self.zmax}) must exceed --zmin ({self.zmin})")
        if self.zmin < 0:
            raise ConfigError(f"--zmin must be >= 0, got {self.zmin}")
        if self.base < 0:
            raise ConfigError(f"--base must be >= 0, got {self.base}")
        if not (self.sx > 0 and self.sy > 0):
            raise ConfigError("--sx and --sy must be positive")
        if self.slice_dz is not None and not self.slice_dz > 0:
            raise ConfigError(f"--slice-dz must be positive, got {self.slice_dz}")
        if self.threshold is not None:
            cut, low, high = self.threshold
            if not 0 < cut < 1:
                raise ConfigError(f"threshold cut must be in (0, 1), got {cut}")
            if low < 0 or high < 0:
                raise ConfigError("threshold heights must be >= 0")
        return self


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="reliefkit", description=__doc__.splitlines()[0])
    p.add_argument("--input", type=Path, required=True, help="P2/P3/P5/P6 image")
    p.add_argument("--output", type=Path, required=True, help="STL file to write")
    p.add_argument("--kernel", choices=("haar", "d4"), default="haar")
    p.add_argument("--rounds", type=int, default=2, help="pyramid smoothing rounds")
    p.add_argument("--zmin", type=float, default=None, help="height of black, mm (default 2)")
    p.add_argument("--zmax", type=float, default=None, help="height of white, mm (default 10)")
    p.add_argument("--base", type=float, default=0.5, help="base plate thickness, mm")
    p.add_argument("--invert", action="store_true", help="dark is tall")
    p.add_argument("--threshold", type=float, nargs=3, metavar=("CUT", "LOW", "HIGH"),
                   help="two-level heights instead of the continuous zmin..zmax map")
    p.add_argument("--sx", type=float, default=1.0, help="x spacing per output cell, mm")
    p.add_argument("--sy", type=float, default=1.0, help="y spacing per output cell, mm")
    p.add_argument("--format", choices=("ascii", "binary"), default="binary")
    p.add_argument("--slice-dz", type=float, default=None, help="layer height for slice report")
    p.add_argument("--slice-dir", type=Path, default=None,
                   help="where layer SVGs go (default: <output stem>_layers)")
    p.add_argument("--name", default="relief", help="solid name / binary header")
    return p


def parse_args(argv) -> PipelineConfig:
    """Raise :class:`UsageError` for syntax problems, :class:`ConfigError` for bad values."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.threshold is not None and (ns.zmin is not None or ns.zmax is not None or ns.invert):
        parser.error("--threshold cannot be combined with --zmin/--zmax/--invert")
    cfg = PipelineConfig(
        input=ns.input,
        output=ns.output,
        kernel=ns.kernel,
        rounds=ns.rounds,
        zmin=2.0 if ns.zmin is None else ns.zmin,
        zmax=10.0 if ns.zmax is None else ns.zmax,
        base=ns.base,
        invert=ns.invert,
        threshold=tuple(ns.threshold) if ns.threshold else None,
        sx=ns.sx,
        sy=ns.sy,
        format=ns.format,
        slice_dz=ns.slice_dz,
        slice_dir=ns.slice_dir,
        name=ns.name,
    )
    return cfg.check()


def smooth(gray: np.ndarray, cfg: PipelineConfig, log=None) -> np.ndarray:
    levels = wavelet.pyramid_levels(gray, cfg.rounds, cfg.kernel)
    for r, level in enumerate(levels):
        if log and r:
            log(f"round {r}: {level.shape[0]}x{level.shape[1]}")
    if cfg.kernel == "d4":
        # undo the 2x-per-round D4 gain; ringing can overshoot [0, 1]
        level = np.clip(level / 2.0 ** cfg.rounds, 0.0, 1.0)
    return level


def build_heightfield(img, cfg: PipelineConfig, log=None) -> heightmap.HeightField:
    gray = luminance.to_gray(img).values
    if log:
        lo, hi, mean = luminance.stats(luminance.GrayImage(gray))
        log(f"input {gray.shape[0]}x{gray.shape[1]}, luminance min {lo:.4g} max {hi:.4g} mean {mean:.4g}")
    # image row 0 is the top edge; put it at the largest y
    smoothed = smooth(np.flipud(gray), cfg, log)
    if cfg.threshold is not None:
        cut, low, high = cfg.threshold
        hf = heightmap.HeightField(heightmap.threshold_filter(smoothed, cut, low, high),
                                   base=cfg.base)
    else:
        hf = heightmap.gray_to_height(smoothed, cfg.zmin, cfg.zmax, cfg.invert, base=cfg.base)
    return heightmap.rescale_axes(hf, cfg.sx, cfg.sy)


def run(cfg: PipelineConfig, log=None) -> int:
    """Execute the pipeline; returns the process exit code."""
    if log is None:
        def log(msg):
            print(msg, file=sys.stderr)
    try:
        cfg.check()
    except ConfigError as exc:
        log(f"config error: {exc}")
        return EXIT_CONFIG

    try:
        data = Path(cfg.input).read_bytes()
    except OSError as exc:
        log(f"cannot read input: {exc}")
        return EXIT_IO
    try:
        img = luminance.load_pnm(data)
    except luminance.PnmError as exc:
        log(f"input parse error: {exc}")
        return EXIT_PARSE

    try:
        hf = build_heightfield(img, cfg, log)
    except ValueError as exc:
        # pyramid too deep for the image
        log(f"config error: {exc}")
        return EXIT_CONFIG
    try:
        solid = mesh.heightfield_to_mesh(hf)
    except mesh.DegenerateMeshError as exc:
        log(f"geometry error: {exc}")
        return EXIT_GEOMETRY
    report = mesh.validate(solid)
    if report.defects:
        log(f"geometry error: {len(report.defects)} defects, first: {report.defects[0]}")
        return EXIT_GEOMETRY
    log(f"mesh: {report.vertex_count} vertices, {report.facet_count} facets, "
        f"euler characteristic {report.euler_characteristic}")

    if cfg.format == "binary":
        payload = stl.write_stl_binary(solid, cfg.name)
    else:
        payload = stl.write_stl_ascii(solid, cfg.name)
    try:
        Path(cfg.output).write_bytes(payload)
    except OSError as exc:
        log(f"cannot write output: {exc}")
        return EXIT_IO
    log(f"wrote {cfg.output} ({len(payload)} bytes)")

    if cfg.slice_dz is not None:
        layers = slicer.slice_all(solid, cfg.slice_dz)
        out_dir = cfg.slice_dir or Path(cfg.output).with_name(Path(cfg.output).stem + "_layers")
        summary = {
            "dz": cfg.slice_dz,
            "layer_count": len(layers),
            "total_loop_length": sum(p.perimeter for p in layers),
            "layers": [{"z": p.z, "loops": len(p.loops), "perimeter": p.perimeter}
                       for p in layers],
        }
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
            for k, poly in enumerate(layers):
                (out_dir / f"layer_{k:04d}.svg").write_text(slicer.layer_svg(poly))
            (out_dir / "summary.json").write_text(json.dumps(summary, indent=2))
        except OSError as exc:
            log(f"cannot write slice layers: {exc}")
            return EXIT_IO
        log(f"sliced {len(layers)} layers, total loop length {summary['total_loop_length']:.6g} mm")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
