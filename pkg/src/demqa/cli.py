"""Pipeline orchestration, configuration and report emission.

One command = one process. ``assess`` runs the whole chain (extract ->
validity screen -> Tukey screen -> per-class summaries -> ANOVA ->
correlations -> Moran's I) and emits ``report.json`` plus plot-ready CSV
tables. The other subcommands are thin wrappers over single modules.

Configuration is a flat INI file; command-line flags override it. Every
report echoes the full resolved configuration, because most of the knobs
(weights scheme, quantile convention, extraction method) change numbers.

Exit codes: 0 success, 2 configuration error, 3 input parse error,
4 degenerate statistics.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import math
import os
import shutil
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .errors import (
    ConfigError,
    DegenerateDataError,
    InsufficientDataError,
    ParseError,
)
from .landcover import read_legend_csv, read_training_csv, train_parallelepiped, classify
from .raster import Grid, MultibandGrid, read_ascii_grid, write_ascii_grid
from .sample import (
    EXTRACTION_METHODS,
    SampleRecord,
    attach_class,
    attach_derivatives,
    extract_coincident,
    read_gcp_csv,
)
from .screen import FILTER_FIELDS, tukey_filter, validity_filter
from .spatial import (
    ASSUMPTIONS,
    WEIGHT_SCHEMES,
    build_weights,
    morans_significance,
    permutation_test,
)
from .stats import histogram, pearson_r, anova_decompose, f_test, summarize
from .synth import SCENE_KINDS, SceneSpec, scatter_points
from .terrain import FLAT_ASPECT, slope_aspect

QUANTILE_CONVENTION = "linear interpolation between order statistics (inclusive)"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_DEGENERATE = 4

REPORT_NAME = "report.json"
CSV_NAMES = (
    "samples.csv",
    "stats_by_class.csv",
    "histogram.csv",
    "scatter_dh_vs_h.csv",
    "scatter_dh_vs_slope.csv",
    "scatter_dh_vs_aspect.csv",
)

CORRELATION_PAIRS = (
    ("dh_vs_slope", "delta_h", "slope_deg"),
    ("dh_vs_aspect", "delta_h", "aspect_deg"),
    ("h_dem_vs_slope", "h_dem", "slope_deg"),
    ("h_ref_vs_slope", "h_ref", "slope_deg"),
    ("h_dem_vs_aspect", "h_dem", "aspect_deg"),
    ("h_ref_vs_aspect", "h_ref", "aspect_deg"),
)


@dataclass
class AssessConfig:
    """Resolved configuration of an assessment run."""

    dem: str = ""
    gcps: str = ""
    classmap: str | None = None
    legend: str | None = None
    out_dir: str = "out"
    method: str = "nearest"
    exclude_classes: tuple[int, ...] = ()
    min_h: float | None = None
    tukey_field: str = "delta_h"
    remap: dict[int, int] = field(default_factory=dict)
    z_factor: float = 1.0
    moran_scheme: str = "inverse_distance"
    moran_threshold: float | None = None  # None = auto
    moran_row_standardize: bool = False
    moran_assumption: str = "randomization"
    n_perm: int = 0
    seed: int = 0
    hist_width: float = 1.0
    hist_origin: float = 0.0

    def validate(self) -> None:
        if not self.dem:
            raise ConfigError("no DEM given (config [input] dem or --dem)")
        if not self.gcps:
            raise ConfigError("no GCP file given (config [input] gcps or --gcps)")
        if self.method not in EXTRACTION_METHODS:
            raise ConfigError(f"unknown extraction method '{self.method}'")
        if self.tukey_field not in FILTER_FIELDS:
            raise ConfigError(f"unknown tukey field '{self.tukey_field}'")
        if self.moran_scheme not in WEIGHT_SCHEMES:
            raise ConfigError(f"unknown Moran weights scheme '{self.moran_scheme}'")
        if self.moran_assumption not in ASSUMPTIONS:
            raise ConfigError(f"unknown Moran assumption '{self.moran_assumption}'")
        if self.moran_threshold is not None and self.moran_threshold <= 0:
            raise ConfigError("Moran threshold must be positive or 'auto'")
        if self.n_perm != 0 and self.n_perm < 99:
            raise ConfigError("n_perm must be 0 (analytic only) or >= 99")
        if self.hist_width <= 0:
            raise ConfigError("histogram width must be positive")
        if self.z_factor <= 0:
            raise ConfigError("z_factor must be positive")

    def echo(self) -> dict:
        d = dataclasses.asdict(self)
        d["remap"] = {str(k): v for k, v in sorted(self.remap.items())}
        d["exclude_classes"] = sorted(self.exclude_classes)
        d["moran_threshold"] = (
            "auto" if self.moran_threshold is None else self.moran_threshold
        )
        return d


def _parse_remap(text: str) -> dict[int, int]:
    remap = {}
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        try:
            src, dst = part.split(":")
            remap[int(src)] = int(dst)
        except ValueError:
            raise ConfigError(f"bad class remap entry '{part}' (expected src:dst)") from None
    return remap


def _parse_int_list(text: str) -> tuple[int, ...]:
    out = []
    for part in text.replace(";", ",").split(","):
        part = part.strip()
        if not part:
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise ConfigError(f"bad class code '{part}'") from None
    return tuple(out)


def load_config(path: str | Path) -> AssessConfig:
    """Read an INI config file into an AssessConfig (not yet validated)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path, "r", encoding="utf-8") as f:
            parser.read_file(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"bad config file: {exc}") from None

    cfg = AssessConfig()

    def get(section, option, fallback=None):
        return parser.get(section, option, fallback=fallback)

    cfg.dem = get("input", "dem", cfg.dem)
    cfg.gcps = get("input", "gcps", cfg.gcps)
    cfg.classmap = get("input", "classmap") or None
    cfg.legend = get("input", "legend") or None
    cfg.out_dir = get("output", "dir", cfg.out_dir)
    cfg.method = get("extract", "method", cfg.method)
    excl = get("screen", "exclude_classes")
    if excl:
        cfg.exclude_classes = _parse_int_list(excl)
    min_h = get("screen", "min_h")
    if min_h and min_h.lower() != "none":
        try:
            cfg.min_h = float(min_h)
        except ValueError:
            raise ConfigError(f"bad min_h '{min_h}'") from None
    cfg.tukey_field = get("screen", "tukey_field", cfg.tukey_field)
    remap = get("classes", "remap")
    if remap:
        cfg.remap = _parse_remap(remap)

    def get_typed(section, option, cast, current):
        raw = get(section, option)
        if raw is None:
            return current
        try:
            return cast(raw)
        except ValueError:
            raise ConfigError(f"bad value for [{section}] {option}: '{raw}'") from None

    cfg.z_factor = get_typed("terrain", "z_factor", float, cfg.z_factor)
    cfg.moran_scheme = get("moran", "scheme", cfg.moran_scheme)
    thr = get("moran", "threshold")
    if thr and thr.lower() != "auto":
        try:
            cfg.moran_threshold = float(thr)
        except ValueError:
            raise ConfigError(f"bad Moran threshold '{thr}'") from None
    rs = get("moran", "row_standardize")
    if rs is not None:
        cfg.moran_row_standardize = rs.strip().lower() in ("1", "true", "yes", "on")
    cfg.moran_assumption = get("moran", "assumption", cfg.moran_assumption)
    cfg.n_perm = get_typed("moran", "n_perm", int, cfg.n_perm)
    cfg.seed = get_typed("moran", "seed", int, cfg.seed)
    cfg.hist_width = get_typed("histogram", "width", float, cfg.hist_width)
    cfg.hist_origin = get_typed("histogram", "origin", float, cfg.hist_origin)
    return cfg


def _apply_overrides(cfg: AssessConfig, args: argparse.Namespace) -> None:
    simple = {
        "dem": "dem",
        "gcps": "gcps",
        "classmap": "classmap",
        "legend": "legend",
        "out": "out_dir",
        "method": "method",
        "tukey_field": "tukey_field",
        "scheme": "moran_scheme",
        "assumption": "moran_assumption",
        "n_perm": "n_perm",
        "seed": "seed",
        "hist_width": "hist_width",
        "hist_origin": "hist_origin",
        "z_factor": "z_factor",
        "min_h": "min_h",
    }
    for arg_name, cfg_name in simple.items():
        v = getattr(args, arg_name, None)
        if v is not None:
            setattr(cfg, cfg_name, v)
    if getattr(args, "exclude_classes", None) is not None:
        cfg.exclude_classes = _parse_int_list(args.exclude_classes)
    if getattr(args, "remap", None) is not None:
        cfg.remap = _parse_remap(args.remap)
    if getattr(args, "threshold", None) is not None:
        cfg.moran_threshold = _parse_threshold(args.threshold)
    if getattr(args, "row_standardize", False):
        cfg.moran_row_standardize = True


def _parse_threshold(text: str) -> float | None:
    if text.strip().lower() == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"bad threshold '{text}' (number or 'auto')") from None


# ---------------------------------------------------------------------------
# assess pipeline


@dataclass
class AssessmentReport:
    """Everything one assessment run produced, ready for serialization."""

    provenance: dict
    screening: dict
    stats: dict
    anova: dict
    moran: dict
    correlations: dict
    histograms: dict

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "screening": self.screening,
            "stats": self.stats,
            "anova": self.anova,
            "moran": self.moran,
            "correlations": self.correlations,
            "histograms": self.histograms,
        }


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if hasattr(obj, "item"):  # numpy scalar
        return _jsonable(obj.item())
    return obj


def _values(records: list[SampleRecord], field_name: str) -> list[float]:
    return [getattr(r, field_name) for r in records if getattr(r, field_name) is not None]


def _pairs(records, fx, fy, drop_flat_aspect=True):
    xs, ys = [], []
    for r in records:
        vx = getattr(r, fx)
        vy = getattr(r, fy)
        if vx is None or vy is None:
            continue
        if drop_flat_aspect and (
            (fx == "aspect_deg" and vx == FLAT_ASPECT)
            or (fy == "aspect_deg" and vy == FLAT_ASPECT)
        ):
            continue
        xs.append(vx)
        ys.append(vy)
    return xs, ys


def run_assess(cfg: AssessConfig) -> tuple[AssessmentReport, list[tuple[SampleRecord, str]]]:
    """Run the full assessment pipeline.

    Returns the report plus every record tagged with its screening fate
    (kept / removed_validity / removed_outlier), for the samples table.
    Degenerate inference on a particular statistic (constant errors, too
    few strata) is recorded in the report as a skip, not raised: a
    perfectly flat error field is a legitimate assessment outcome.
    """
    cfg.validate()

    dem = read_ascii_grid(cfg.dem)
    points = read_gcp_csv(cfg.gcps)
    classmap = read_ascii_grid(cfg.classmap) if cfg.classmap else None
    legend = read_legend_csv(cfg.legend) if cfg.legend else {}

    records = extract_coincident(dem, points, method=cfg.method)
    if classmap is not None:
        records = attach_class(classmap, records)
        if cfg.remap:
            records = [
                dataclasses.replace(
                    r, class_code=cfg.remap.get(r.class_code, r.class_code)
                )
                if r.class_code is not None
                else r
                for r in records
            ]
    derivs = slope_aspect(dem, z_factor=cfg.z_factor)
    records = attach_derivatives(derivs.slope, derivs.aspect, records, reference=dem)

    stages = [
        {"stage": "extracted", "before": len(records), "kept": len(records), "removed": 0}
    ]
    kept, removed_validity = validity_filter(
        records,
        exclude_classes=cfg.exclude_classes,
        min_h=cfg.min_h,
        require_class=classmap is not None,
    )
    stages.append(
        {
            "stage": "validity",
            "before": len(records),
            "kept": len(kept),
            "removed": len(removed_validity),
        }
    )
    n_before_tukey = len(kept)
    kept, removed_outlier, fences = tukey_filter(kept, field=cfg.tukey_field)
    stages.append(
        {
            "stage": "tukey",
            "before": n_before_tukey,
            "kept": len(kept),
            "removed": len(removed_outlier),
        }
    )

    deltas = _values(kept, "delta_h")
    if len(deltas) < 2:
        raise InsufficientDataError(
            f"only {len(deltas)} usable records after screening; need >= 2"
        )

    def class_label(code: int) -> str:
        return legend.get(code, str(code))

    by_class: dict[int, list[SampleRecord]] = {}
    for r in kept:
        if r.class_code is not None:
            by_class.setdefault(r.class_code, []).append(r)

    stats_section: dict = {"total": dataclasses.asdict(summarize(deltas))}
    for code in sorted(by_class):
        values = _values(by_class[code], "delta_h")
        entry: dict = {"label": class_label(code)}
        if len(values) >= 2:
            entry.update(dataclasses.asdict(summarize(values)))
        else:
            entry.update({"n": len(values), "skipped": "fewer than 2 values"})
        stats_section[str(code)] = entry

    anova_section = _try_inference(
        lambda: dataclasses.asdict(
            f_test(*anova_decompose([_values(g, "delta_h") for g in _anova_groups(by_class)]))
        )
    )

    correlations = {}
    for key, height_field, deriv_field in CORRELATION_PAIRS:
        xs, ys = _pairs(kept, height_field, deriv_field)
        correlations[key] = _try_inference(
            lambda xs=xs, ys=ys: dataclasses.asdict(pearson_r(xs, ys))
        )

    moran_section = _moran_section(cfg, kept)

    hist_section: dict = {
        "total": _hist_table(deltas, cfg),
    }
    for code in sorted(by_class):
        hist_section[str(code)] = _hist_table(_values(by_class[code], "delta_h"), cfg)

    provenance = {
        "tool": "demqa",
        "version": __version__,
        "command": "assess",
        "inputs": {
            "dem": cfg.dem,
            "gcps": cfg.gcps,
            "classmap": cfg.classmap,
            "legend": cfg.legend,
        },
        "config": cfg.echo(),
        "seed": cfg.seed,
        "extraction_method": cfg.method,
        "quantile_convention": QUANTILE_CONVENTION,
    }
    screening = {
        "stages": stages,
        "tukey_field": cfg.tukey_field,
        "tukey_fences": dataclasses.asdict(fences),
    }
    report = AssessmentReport(
        provenance=provenance,
        screening=screening,
        stats=stats_section,
        anova=anova_section,
        moran=moran_section,
        correlations=correlations,
        histograms=hist_section,
    )

    tagged = (
        [(r, "kept") for r in kept]
        + [(r, "removed_validity") for r in removed_validity]
        + [(r, "removed_outlier") for r in removed_outlier]
    )
    tagged.sort(key=lambda t: t[0].id)
    return report, tagged


def _anova_groups(by_class: dict[int, list[SampleRecord]]) -> list[list[SampleRecord]]:
    groups = [g for _, g in sorted(by_class.items()) if _values(g, "delta_h")]
    if len(groups) < 2:
        raise InsufficientDataError(
            f"ANOVA needs >= 2 land-cover strata, got {len(groups)}"
        )
    return groups


def _try_inference(thunk) -> dict:
    try:
        return thunk()
    except DegenerateDataError as exc:
        return {"skipped": str(exc)}


def _moran_section(cfg: AssessConfig, kept: list[SampleRecord]) -> dict:
    def compute() -> dict:
        coords = [(r.x, r.y) for r in kept if r.delta_h is not None]
        values = [r.delta_h for r in kept if r.delta_h is not None]
        w = build_weights(
            coords,
            scheme=cfg.moran_scheme,
            threshold=cfg.moran_threshold,
            row_standardize=cfg.moran_row_standardize,
        )
        result = morans_significance(values, w, assumption=cfg.moran_assumption)
        section = dataclasses.asdict(result)
        section["weights"] = {
            "scheme": cfg.moran_scheme,
            "threshold": (
                "auto" if cfg.moran_threshold is None else cfg.moran_threshold
            ),
            "threshold_used": w.threshold,
            "row_standardized": cfg.moran_row_standardize,
            "n": w.n,
            "s0": w.s0,
            "s1": w.s1,
            "s2": w.s2,
        }
        if cfg.n_perm > 0:
            perm = permutation_test(values, w, n_perm=cfg.n_perm, seed=cfg.seed)
            section["permutation"] = dataclasses.asdict(perm)
        return section

    return _try_inference(compute)


def _hist_table(values: list[float], cfg: AssessConfig) -> list[dict]:
    return [
        {"lower": lower, "count": count}
        for lower, count in histogram(values, bin_width=cfg.hist_width, origin=cfg.hist_origin)
    ]


# ---------------------------------------------------------------------------
# output files


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(v))  # plain float repr even for numpy scalars
    return str(v)


def _provenance_comment(command: str) -> str:
    return f"# generated by demqa {__version__} ({command})"


def _write_csv(path: Path, command: str, header: list[str], rows: list[list]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(_provenance_comment(command) + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt_cell(v) for v in row])


def write_assess_outputs(
    report: AssessmentReport,
    tagged: list[tuple[SampleRecord, str]],
    out_dir: str | Path,
    legend: dict[int, str],
) -> list[Path]:
    """Write report.json and the CSV tables atomically.

    All files land in a temp directory first and are renamed into place
    only after every one of them has been produced.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tmpdir = Path(tempfile.mkdtemp(prefix=".demqa-tmp-", dir=out))
    try:
        _write_files(report, tagged, tmpdir, legend)
        written = []
        for name in (REPORT_NAME, *CSV_NAMES):
            os.replace(tmpdir / name, out / name)
            written.append(out / name)
        return written
    finally:
        shutil.rmtree(tmpdir, ignore_errors=True)


def _write_files(report, tagged, tmpdir: Path, legend: dict[int, str]) -> None:
    with open(tmpdir / REPORT_NAME, "w", encoding="utf-8", newline="") as f:
        json.dump(_jsonable(report.to_dict()), f, indent=2, sort_keys=True)
        f.write("\n")

    sample_rows = [
        [
            r.id,
            r.x,
            r.y,
            r.h_ref,
            r.h_dem,
            r.delta_h,
            r.class_code,
            None if r.class_code is None else legend.get(r.class_code, str(r.class_code)),
            r.slope_deg,
            r.aspect_deg,
            status,
        ]
        for r, status in tagged
    ]
    _write_csv(
        tmpdir / "samples.csv",
        "assess",
        ["id", "x", "y", "h_ref", "h_dem", "delta_h", "class_code", "class_label",
         "slope_deg", "aspect_deg", "status"],
        sample_rows,
    )

    stats_rows = []
    for key, entry in report.stats.items():
        if key == "total":
            label, code = "total", "total"
        else:
            label, code = entry.get("label", key), key
        stats_rows.append(
            [
                code,
                label,
                entry.get("n"),
                entry.get("mean"),
                entry.get("sd"),
                entry.get("rmse"),
                entry.get("min"),
                entry.get("max"),
                entry.get("range"),
            ]
        )
    _write_csv(
        tmpdir / "stats_by_class.csv",
        "assess",
        ["class_code", "label", "n", "mean", "sd", "rmse", "min", "max", "range"],
        stats_rows,
    )

    hist_rows = []
    for key, bins in report.histograms.items():
        for b in bins:
            hist_rows.append([key, b["lower"], b["count"]])
    _write_csv(
        tmpdir / "histogram.csv", "assess", ["class", "bin_lower", "count"], hist_rows
    )

    kept = [r for r, status in tagged if status == "kept"]
    _write_csv(
        tmpdir / "scatter_dh_vs_h.csv",
        "assess",
        ["id", "h_dem", "delta_h"],
        [[r.id, r.h_dem, r.delta_h] for r in kept if r.h_dem is not None],
    )
    _write_csv(
        tmpdir / "scatter_dh_vs_slope.csv",
        "assess",
        ["id", "slope_deg", "delta_h"],
        [
            [r.id, r.slope_deg, r.delta_h]
            for r in kept
            if r.slope_deg is not None and r.delta_h is not None
        ],
    )
    _write_csv(
        tmpdir / "scatter_dh_vs_aspect.csv",
        "assess",
        ["id", "aspect_deg", "delta_h"],
        [
            [r.id, r.aspect_deg, r.delta_h]
            for r in kept
            if r.aspect_deg is not None
            and r.aspect_deg != FLAT_ASPECT
            and r.delta_h is not None
        ],
    )


# ---------------------------------------------------------------------------
# subcommands


def cmd_assess(args: argparse.Namespace) -> int:
    cfg = load_config(args.config) if args.config else AssessConfig()
    _apply_overrides(cfg, args)
    report, tagged = run_assess(cfg)
    legend = read_legend_csv(cfg.legend) if cfg.legend else {}
    written = write_assess_outputs(report, tagged, cfg.out_dir, legend)
    total = report.stats["total"]
    print(
        f"assessed {total['n']} points: mean {total['mean']:.4f} m, "
        f"sd {total['sd']:.4f} m, rmse {total['rmse']:.4f} m"
    )
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_terrain(args: argparse.Namespace) -> int:
    dem = read_ascii_grid(args.dem)
    pair = slope_aspect(dem, z_factor=args.z_factor)
    comment = _provenance_comment("terrain").lstrip("# ") + f" from {args.dem}"
    slope_path = f"{args.out_prefix}_slope.asc"
    aspect_path = f"{args.out_prefix}_aspect.asc"
    write_ascii_grid(pair.slope, slope_path, comment=comment)
    write_ascii_grid(pair.aspect, aspect_path, comment=comment)
    print(f"wrote {slope_path}")
    print(f"wrote {aspect_path}")
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    image = MultibandGrid(bands=[read_ascii_grid(p) for p in args.image])
    training = read_training_csv(args.training)
    legend = read_legend_csv(args.legend) if args.legend else None
    boxes = train_parallelepiped(image, training, k=args.k, labels=legend)
    result = classify(image, boxes)
    comment = (
        _provenance_comment("classify").lstrip("# ")
        + f" k={args.k} training={args.training}"
    )
    write_ascii_grid(result, args.out, comment=comment)
    print(f"wrote {args.out} ({len(boxes)} classes)")
    cell_area = result.cellsize * result.cellsize
    for box in boxes:
        count = int((result.values == box.class_code).sum())
        print(f"  class {box.class_code} ({box.label}): {count} cells, "
              f"area {count * cell_area!r}")
    unclassified = int((result.values == 0).sum())
    print(f"  unclassified: {unclassified} cells")
    return EXIT_OK


def _read_samples_csv(path: str, field_name: str) -> tuple[list[tuple[float, float]], list[float]]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        lines = [ln for ln in f if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty samples file")
    reader = csv.DictReader(io.StringIO("".join(lines)))
    cols = [c.strip().lower() for c in reader.fieldnames or []]
    for needed in ("x", "y", field_name):
        if needed not in cols:
            raise ParseError(f"samples file lacks column '{needed}'")
    coords, values = [], []
    for lineno, row in enumerate(reader, start=2):
        row = {k.strip().lower(): v for k, v in row.items() if k}
        if (row.get("status") or "kept").strip() != "kept":
            continue
        raw = (row.get(field_name) or "").strip()
        if not raw:
            continue
        try:
            coords.append((float(row["x"]), float(row["y"])))
            values.append(float(raw))
        except (TypeError, ValueError):
            raise ParseError("bad numeric value in samples file", line=lineno) from None
    return coords, values


def cmd_moran(args: argparse.Namespace) -> int:
    threshold = _parse_threshold(args.threshold)
    if args.n_perm != 0 and args.n_perm < 99:
        raise ConfigError("n_perm must be 0 (analytic only) or >= 99")
    coords, values = _read_samples_csv(args.samples, args.field)
    w = build_weights(
        coords,
        scheme=args.scheme,
        threshold=threshold,
        row_standardize=args.row_standardize,
    )
    result = morans_significance(values, w, assumption=args.assumption)
    out = dataclasses.asdict(result)
    out["weights"] = {
        "scheme": args.scheme,
        "threshold": "auto" if threshold is None else threshold,
        "threshold_used": w.threshold,
        "row_standardized": args.row_standardize,
        "n": w.n,
        "s0": w.s0,
    }
    if args.n_perm > 0:
        out["permutation"] = dataclasses.asdict(
            permutation_test(values, w, n_perm=args.n_perm, seed=args.seed)
        )
    out["provenance"] = _provenance_comment("moran").lstrip("# ") + f" samples={args.samples}"
    text = json.dumps(_jsonable(out), indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SceneSpec(
        kind=args.kind,
        nrows=args.nrows,
        ncols=args.ncols,
        cellsize=args.cellsize,
        xll=args.xll,
        yll=args.yll,
        a=args.a,
        b=args.b,
        c=args.c,
        amplitude=args.amplitude,
        sd=args.sd,
        radius=args.radius,
        seed=args.seed,
    )
    grid = spec.build()
    comment = _provenance_comment("synth").lstrip("# ") + f" kind={args.kind} seed={args.seed}"
    write_ascii_grid(grid, args.out, comment=comment)
    print(f"wrote {args.out}")
    if args.gcps_out:
        pts = scatter_points(
            grid,
            args.n_points,
            seed=args.seed,
            min_separation=args.min_separation,
            snap_to_centres=args.snap_centres,
            error_sd=args.error_sd,
        )
        with open(args.gcps_out, "w", encoding="utf-8", newline="") as f:
            f.write(_provenance_comment("synth") + "\n")
            f.write("id,x,y,h\n")
            for p in pts:
                f.write(f"{p.id},{repr(p.x)},{repr(p.y)},{repr(p.h_ref)}\n")
        print(f"wrote {args.gcps_out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="demqa",
        description="Vertical accuracy assessment of a DEM against ground control points.",
    )
    parser.add_argument("--version", action="version", version=f"demqa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assess", help="run the full assessment pipeline")
    p.add_argument("--config", help="INI config file; flags below override it")
    p.add_argument("--dem", help="DEM ASCII grid")
    p.add_argument("--gcps", help="control point CSV (id,x,y,h)")
    p.add_argument("--classmap", help="land-cover class grid")
    p.add_argument("--legend", help="class legend CSV (class_code,label)")
    p.add_argument("--out", help="output directory")
    p.add_argument("--method", choices=EXTRACTION_METHODS, help="height extraction method")
    p.add_argument("--exclude-classes", dest="exclude_classes",
                   help="comma-separated class codes to drop")
    p.add_argument("--min-h", dest="min_h", type=float, help="drop records with h_dem below this")
    p.add_argument("--tukey-field", dest="tukey_field", choices=FILTER_FIELDS)
    p.add_argument("--remap", help="class remap entries src:dst[,src:dst...]")
    p.add_argument("--z-factor", dest="z_factor", type=float)
    p.add_argument("--scheme", choices=WEIGHT_SCHEMES, help="Moran weights scheme")
    p.add_argument("--threshold", help="Moran distance threshold or 'auto'")
    p.add_argument("--row-standardize", dest="row_standardize", action="store_true")
    p.add_argument("--assumption", choices=ASSUMPTIONS)
    p.add_argument("--n-perm", dest="n_perm", type=int, help="permutations (0 = analytic only)")
    p.add_argument("--seed", type=int)
    p.add_argument("--hist-width", dest="hist_width", type=float)
    p.add_argument("--hist-origin", dest="hist_origin", type=float)
    p.set_defaults(func=cmd_assess)

    p = sub.add_parser("terrain", help="slope/aspect grids from a DEM")
    p.add_argument("dem")
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--z-factor", dest="z_factor", type=float, default=1.0)
    p.set_defaults(func=cmd_terrain)

    p = sub.add_parser("classify", help="parallelepiped land-cover classification")
    p.add_argument("--image", nargs="+", required=True, help="band grids, in order")
    p.add_argument("--training", required=True, help="CSV x,y,class_code")
    p.add_argument("--legend", help="CSV class_code,label")
    p.add_argument("--k", type=float, default=2.0, help="box half-width in SDs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("moran", help="Global Moran's I of a sample table")
    p.add_argument("--samples", required=True, help="CSV with x, y and the value field")
    p.add_argument("--field", default="delta_h")
    p.add_argument("--scheme", choices=WEIGHT_SCHEMES, default="inverse_distance")
    p.add_argument("--threshold", default="auto")
    p.add_argument("--row-standardize", dest="row_standardize", action="store_true")
    p.add_argument("--assumption", choices=ASSUMPTIONS, default="randomization")
    p.add_argument("--n-perm", dest="n_perm", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_moran)

    p = sub.add_parser("synth", help="generate a synthetic scene")
    p.add_argument("--kind", choices=SCENE_KINDS, required=True)
    p.add_argument("--nrows", type=int, required=True)
    p.add_argument("--ncols", type=int, required=True)
    p.add_argument("--cellsize", type=float, default=1.0)
    p.add_argument("--xll", type=float, default=0.0)
    p.add_argument("--yll", type=float, default=0.0)
    p.add_argument("--a", type=float, default=0.0, help="plane x gradient")
    p.add_argument("--b", type=float, default=0.0, help="plane y gradient")
    p.add_argument("--c", type=float, default=0.0, help="plane offset")
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--sd", type=float, default=1.0)
    p.add_argument("--radius", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--gcps-out", dest="gcps_out")
    p.add_argument("--n-points", dest="n_points", type=int, default=100)
    p.add_argument("--min-separation", dest="min_separation", type=float, default=0.0)
    p.add_argument("--snap-centres", dest="snap_centres", action="store_true")
    p.add_argument("--error-sd", dest="error_sd", type=float, default=0.0)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"parse error [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except DegenerateDataError as exc:
        print(f"degenerate statistics [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"i/o error [{args.command}]: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
