"""Command-line interface: track, eval, bench, and synth subcommands.

Configuration precedence is flags > config file > preset defaults. All output
files are deterministic functions of the inputs; nothing timestamped is ever
written, so repeated runs (and different worker counts) produce byte-identical
artifacts.
"""

from __future__ import annotations

import argparse
import glob as globmod
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from .errors import ConsistencyError, DimensionError, LoadError, ParameterError
from .filters import PRESET_NAMES, Cls, FilterConfig, Wiener, preset
from .metrics import (
    ComparisonTable,
    Curve,
    EvalReport,
    SequenceEval,
    build_report,
    comparison_table,
    evaluate_result,
)
from .sequences import (
    Distractor,
    Linear,
    SequenceMeta,
    Sinusoidal,
    Static,
    SynthSpec,
    iter_frames,
    load_attributes,
    load_result,
    load_sequence,
    render_sequence,
    save_result,
)
from .tracker import run_sequence

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONSISTENCY = 3
EXIT_INTERNAL = 4


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------


def restoration_from_json(value) -> Wiener | Cls | None:
    if value is None or value == "none":
        return None
    if value == "wiener":
        return Wiener()
    if isinstance(value, dict):
        kind = value.get("type")
        if kind == "wiener":
            return Wiener(k=value.get("k"))
        if kind == "cls":
            if "gamma" not in value:
                raise ParameterError("cls restoration requires a gamma value")
            return Cls(gamma=float(value["gamma"]))
    raise ParameterError(f"unrecognized restoration description: {value!r}")


_CONFIG_SCALARS = (
    "lambda1",
    "lambda2",
    "anchor_weight",
    "learning_rate",
    "sigma_factor",
    "padding",
    "offset_factor",
)


def config_from_dict(data: dict, base: FilterConfig | None = None) -> FilterConfig:
    cfg = base if base is not None else FilterConfig()
    unknown = set(data) - set(_CONFIG_SCALARS) - {"restoration", "context_mode"}
    if unknown:
        raise ParameterError(f"unknown config keys: {sorted(unknown)}")
    updates = {}
    for key in _CONFIG_SCALARS:
        if key in data:
            updates[key] = float(data[key])
    if "context_mode" in data:
        updates["context_mode"] = str(data["context_mode"])
    if "restoration" in data:
        updates["restoration"] = restoration_from_json(data["restoration"])
    return replace(cfg, **updates)


def _load_json(path: Path | str) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise LoadError(f"malformed JSON in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise LoadError(f"{path} must hold a JSON object")
    return data


def resolve_config(args: argparse.Namespace) -> tuple[str, FilterConfig]:
    """Apply the precedence chain: preset, then config file, then flags."""
    name = args.variant
    cfg = preset(name) if name != "custom" else FilterConfig()
    if getattr(args, "config", None):
        cfg = config_from_dict(_load_json(args.config), cfg)
    flag_updates = {}
    for key in _CONFIG_SCALARS:
        value = getattr(args, key, None)
        if value is not None:
            flag_updates[key] = value
    if getattr(args, "context_mode", None):
        flag_updates["context_mode"] = args.context_mode
    if getattr(args, "restoration", None):
        if args.restoration == "none":
            flag_updates["restoration"] = None
        elif args.restoration == "wiener":
            flag_updates["restoration"] = Wiener(k=getattr(args, "wiener_k", None))
        elif args.restoration == "cls":
            gamma = getattr(args, "cls_gamma", None)
            if gamma is None:
                raise ParameterError("--restoration cls requires --cls-gamma")
            flag_updates["restoration"] = Cls(gamma=gamma)
    if flag_updates:
        cfg = replace(cfg, **flag_updates)
    return name, cfg


def variant_string(name: str, cfg: FilterConfig) -> str:
    return f"{name}:{cfg.fingerprint()}"


# ---------------------------------------------------------------------------
# Synthetic spec plumbing
# ---------------------------------------------------------------------------


def motion_from_json(value) -> Static | Linear | Sinusoidal:
    if value is None:
        return Static()
    if not isinstance(value, dict):
        raise ParameterError(f"motion must be an object with a 'type', got {value!r}")
    kind = value.get("type")
    if kind == "static":
        return Static()
    if kind == "linear":
        return Linear(vx=float(value.get("vx", 0.0)), vy=float(value.get("vy", 0.0)))
    if kind == "sinusoidal":
        if "amplitude" not in value or "period" not in value:
            raise ParameterError("sinusoidal motion requires amplitude and period")
        return Sinusoidal(amplitude=float(value["amplitude"]), period=float(value["period"]))
    raise ParameterError(f"unrecognized motion description: {value!r}")


def synth_spec_from_dict(data: dict, default_seed: int = 0) -> SynthSpec:
    try:
        size = tuple(int(v) for v in data["size"])
        frames = int(data["frames"])
        target_size = tuple(int(v) for v in data["target_size"])
        distractor = None
        if data.get("distractor") is not None:
            d = data["distractor"]
            distractor = Distractor(
                offset=tuple(float(v) for v in d["offset"]),
                velocity=tuple(float(v) for v in d.get("velocity", (0.0, 0.0))),
            )
        start = data.get("start")
        return SynthSpec(
            size=size,
            frames=frames,
            target_size=target_size,
            motion=motion_from_json(data.get("motion")),
            start=tuple(float(v) for v in start) if start is not None else None,
            texture_seed=int(data.get("texture_seed", default_seed)),
            noise_sigma=float(data.get("noise_sigma", 0.0)),
            distractor=distractor,
            illumination_ramp=(
                float(data["illumination_ramp"])
                if data.get("illumination_ramp") is not None
                else None
            ),
            background=str(data.get("background", "blocks")),
            name=str(data.get("name", "")),
        )
    except KeyError as exc:
        raise ParameterError(f"synth spec is missing required key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"malformed synth spec value: {exc}") from None


# ---------------------------------------------------------------------------
# Report writing
# ---------------------------------------------------------------------------


def _curve_dict(curve: Curve) -> dict:
    return {"thresholds": list(curve.thresholds), "values": list(curve.values)}


def _row_dict(row: SequenceEval) -> dict:
    return {
        "name": row.name,
        "precision_20": row.precision_20,
        "success_auc": row.success_auc,
        "success_rate_50": row.success_rate_50,
        "precision_curve": _curve_dict(row.precision),
        "success_curve": _curve_dict(row.success),
    }


def report_to_dict(report: EvalReport) -> dict:
    return {
        "per_sequence": [_row_dict(r) for r in report.per_sequence],
        "overall": {
            "precision_20": report.overall_precision_20,
            "success_auc": report.overall_success_auc,
            "precision_curve": _curve_dict(report.overall_precision),
            "success_curve": _curve_dict(report.overall_success),
        },
        "per_attribute": {
            code: {
                "precision_curve": _curve_dict(curves["precision"]),
                "success_curve": _curve_dict(curves["success"]),
            }
            for code, curves in sorted(report.per_attribute.items())
        },
    }


def _table_dict(table: ComparisonTable) -> dict:
    return {
        "sequences": list(table.sequences),
        "variants": list(table.variants),
        "cells": table.cells,
        "means": table.means,
    }


def _write_curve_csv(path: Path, curve: Curve) -> None:
    lines = ["threshold,value"]
    lines += [f"{t!r},{v!r}" for t, v in zip(curve.thresholds, curve.values)]
    path.write_text("\n".join(lines) + "\n")


def _safe_name(text: str) -> str:
    return text.replace(":", "-").replace("/", "-")


def write_report_files(
    out_dir: Path,
    reports: dict[str, EvalReport],
    tables: dict[str, ComparisonTable],
    failures: list[dict] | None = None,
) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "variants": {name: report_to_dict(rep) for name, rep in sorted(reports.items())},
        "comparison": {metric: _table_dict(t) for metric, t in sorted(tables.items())},
    }
    if failures is not None:
        payload["failures"] = sorted(failures, key=lambda f: (f["sequence"], f["variant"]))
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")

    curves_dir = out_dir / "curves"
    curves_dir.mkdir(exist_ok=True)
    for name, report in sorted(reports.items()):
        tag = _safe_name(name)
        _write_curve_csv(curves_dir / f"{tag}__overall__precision.csv", report.overall_precision)
        _write_curve_csv(curves_dir / f"{tag}__overall__success.csv", report.overall_success)
        for row in report.per_sequence:
            _write_curve_csv(curves_dir / f"{tag}__{row.name}__precision.csv", row.precision)
            _write_curve_csv(curves_dir / f"{tag}__{row.name}__success.csv", row.success)
        for code, curves in sorted(report.per_attribute.items()):
            _write_curve_csv(curves_dir / f"{tag}__attr-{code}__precision.csv", curves["precision"])
            _write_curve_csv(curves_dir / f"{tag}__attr-{code}__success.csv", curves["success"])
    for metric, table in sorted(tables.items()):
        (out_dir / f"table_{metric}.csv").write_text(table.to_csv())
        (out_dir / f"table_{metric}.txt").write_text(table.to_text() + "\n")
    return report_path


def _build_tables(
    rows_by_variant: dict[str, dict[str, SequenceEval]]
) -> dict[str, ComparisonTable]:
    """Comparison tables over the sequences every variant completed."""
    if len(rows_by_variant) < 2:
        return {}
    common = None
    for rows in rows_by_variant.values():
        names = set(rows)
        common = names if common is None else common & names
    if not common:
        return {}
    rate = {
        v: {name: rows[name].success_rate_50 * 100.0 for name in common}
        for v, rows in rows_by_variant.items()
    }
    auc = {
        v: {name: rows[name].success_auc * 100.0 for name in common}
        for v, rows in rows_by_variant.items()
    }
    return {
        "success_rate_50": comparison_table(rate),
        "success_auc": comparison_table(auc),
    }


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_track(args: argparse.Namespace) -> int:
    name, cfg = resolve_config(args)
    attributes = load_attributes(args.attributes) if args.attributes else None
    meta = load_sequence(args.seq, attributes)
    result = run_sequence(
        iter_frames(meta),
        meta.ground_truth[0],
        cfg,
        sequence_id=meta.name,
        variant=variant_string(name, cfg),
    )
    save_result(result, args.out)
    print(f"tracked {meta.name}: {len(result.boxes)} boxes -> {args.out}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    spec = synth_spec_from_dict(_load_json(args.spec), default_seed=args.seed or 0)
    out = render_sequence(spec, args.out)
    print(f"rendered {spec.frames} frames -> {out}")
    return EXIT_OK


def _index_sequences(meta_paths: list[str], attributes) -> dict[str, SequenceMeta]:
    index: dict[str, SequenceMeta] = {}
    for raw in meta_paths:
        root = Path(raw)
        if (root / "groundtruth_rect.txt").is_file():
            candidates = [root]
        elif root.is_dir():
            candidates = sorted(
                p for p in root.iterdir() if (p / "groundtruth_rect.txt").is_file()
            )
        else:
            raise LoadError(f"meta path {root} is not a directory")
        for seq_dir in candidates:
            meta = load_sequence(seq_dir, attributes)
            index[meta.name] = meta
    return index


def cmd_eval(args: argparse.Namespace) -> int:
    result_paths: list[str] = []
    for pattern in args.results:
        matched = sorted(globmod.glob(pattern))
        if not matched and Path(pattern).is_file():
            matched = [pattern]
        result_paths.extend(matched)
    if not result_paths:
        raise LoadError(f"no result files match {args.results}")
    results = [load_result(p) for p in result_paths]

    attributes = load_attributes(args.attributes) if args.attributes else None
    index = _index_sequences(args.meta, attributes)

    rows_by_variant: dict[str, dict[str, SequenceEval]] = {}
    metas_by_variant: dict[str, list[SequenceMeta]] = {}
    for result in results:
        meta = index.get(result.sequence_id)
        if meta is None:
            raise ConsistencyError(
                f"result references unknown sequence {result.sequence_id!r}; "
                f"known: {sorted(index)}"
            )
        row = evaluate_result(result, meta)
        rows = rows_by_variant.setdefault(result.variant, {})
        if row.name in rows:
            raise ConsistencyError(
                f"duplicate result for sequence {row.name!r}, variant {result.variant!r}"
            )
        rows[row.name] = row
        metas_by_variant.setdefault(result.variant, []).append(meta)

    reports = {
        variant: build_report(list(rows.values()), metas_by_variant[variant])
        for variant, rows in rows_by_variant.items()
    }
    tables = _build_tables(rows_by_variant)
    out_dir = Path(args.out)
    write_report_files(out_dir, reports, tables)
    for variant, report in sorted(reports.items()):
        print(
            f"{variant}: precision@20={report.overall_precision_20:.4f} "
            f"success_auc={report.overall_success_auc:.4f}"
        )
    return EXIT_OK


def _bench_job(seq_dir: Path, attributes, variant_name: str, cfg: FilterConfig, out_path: Path):
    meta = load_sequence(seq_dir, attributes)
    result = run_sequence(
        iter_frames(meta),
        meta.ground_truth[0],
        cfg,
        sequence_id=meta.name,
        variant=variant_string(variant_name, cfg),
    )
    save_result(result, out_path)
    return meta, result


def cmd_bench(args: argparse.Namespace) -> int:
    manifest = _load_json(args.manifest)
    sequences = manifest.get("sequences", [])
    variant_entries = manifest.get("variants", [])
    if not sequences or not variant_entries:
        raise ParameterError("manifest needs at least one sequence and one variant")
    workers = args.workers if args.workers is not None else int(manifest.get("workers", 1))
    if workers < 1:
        raise ParameterError(f"workers must be >= 1, got {workers}")
    seed = args.seed if args.seed is not None else int(manifest.get("seed", 0))
    out_dir = Path(args.out or manifest.get("output_dir", "bench-out"))

    attributes = None
    if manifest.get("attributes"):
        attributes = load_attributes(
            Path(args.manifest).parent / manifest["attributes"]
            if not Path(manifest["attributes"]).is_absolute()
            else manifest["attributes"]
        )

    # Variants: preset names or {"name": ..., "config": {...}} objects.
    variants: list[tuple[str, FilterConfig]] = []
    for entry in variant_entries:
        if isinstance(entry, str):
            variants.append((entry, preset(entry)))
        else:
            vname = entry.get("name")
            if not vname:
                raise ParameterError("custom variant entries need a 'name'")
            base = preset(entry["preset"]) if entry.get("preset") else FilterConfig()
            variants.append((vname, config_from_dict(entry.get("config", {}), base)))
    if len({v for v, _ in variants}) != len(variants):
        raise ParameterError("variant names must be unique")

    # Sequences: directory paths or {"synth": {...}} specs rendered up front so
    # everything flows through the on-disk loader.
    seq_dirs: list[Path] = []
    for i, entry in enumerate(sequences):
        if isinstance(entry, str):
            seq_dirs.append(Path(entry))
        elif isinstance(entry, dict) and "synth" in entry:
            spec = synth_spec_from_dict(entry["synth"], default_seed=seed + i)
            seq_dirs.append(render_sequence(spec, out_dir / "sequences" / spec.label()))
        else:
            raise ParameterError(f"unrecognized sequence entry: {entry!r}")
    names = [d.name for d in seq_dirs]
    if len(set(names)) != len(names):
        raise ParameterError(f"sequence names must be unique, got {names}")

    jobs = sorted(
        (seq_dir, vname, cfg)
        for seq_dir in seq_dirs
        for vname, cfg in variants
    )
    results_dir = out_dir / "results"

    def run_job(job):
        seq_dir, vname, cfg = job
        out_path = results_dir / f"{seq_dir.name}__{_safe_name(vname)}.txt"
        try:
            meta, result = _bench_job(seq_dir, attributes, vname, cfg, out_path)
            return (seq_dir.name, vname, meta, result, None)
        except Exception as exc:  # a failed row must not take the batch down
            return (seq_dir.name, vname, None, None, str(exc))

    if workers == 1:
        outcomes = [run_job(j) for j in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run_job, jobs))
    outcomes.sort(key=lambda o: (o[0], o[1]))

    failures = []
    rows_by_variant: dict[str, dict[str, SequenceEval]] = {}
    metas_by_variant: dict[str, list[SequenceMeta]] = {}
    for seq_name, vname, meta, result, error in outcomes:
        if error is not None:
            failures.append({"sequence": seq_name, "variant": vname, "error": error})
            continue
        row = evaluate_result(result, meta)
        rows_by_variant.setdefault(vname, {})[row.name] = row
        metas_by_variant.setdefault(vname, []).append(meta)

    reports = {
        vname: build_report(list(rows.values()), metas_by_variant[vname])
        for vname, rows in rows_by_variant.items()
        if rows
    }
    tables = _build_tables(rows_by_variant)
    write_report_files(out_dir, reports, tables, failures=failures)

    for vname, report in sorted(reports.items()):
        print(
            f"{vname}: precision@20={report.overall_precision_20:.4f} "
            f"success_auc={report.overall_success_auc:.4f}"
        )
    for failure in failures:
        print(
            f"warning: {failure['sequence']} x {failure['variant']} failed: {failure['error']}",
            file=sys.stderr,
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, default=None, help="parallel sequence workers")
    parser.add_argument("--seed", type=int, default=None, help="seed for derived synth textures")
    parser.add_argument("--config", default=None, help="JSON config file overriding the preset")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lambda1", type=float, default=None)
    parser.add_argument("--lambda2", type=float, default=None)
    parser.add_argument("--anchor-weight", dest="anchor_weight", type=float, default=None)
    parser.add_argument("--learning-rate", dest="learning_rate", type=float, default=None)
    parser.add_argument("--sigma-factor", dest="sigma_factor", type=float, default=None)
    parser.add_argument("--padding", type=float, default=None)
    parser.add_argument("--offset-factor", dest="offset_factor", type=float, default=None)
    parser.add_argument("--context-mode", dest="context_mode", choices=["none", "all", "selected"], default=None)
    parser.add_argument("--restoration", choices=["none", "wiener", "cls"], default=None)
    parser.add_argument("--wiener-k", dest="wiener_k", type=float, default=None)
    parser.add_argument("--cls-gamma", dest="cls_gamma", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rcacf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_track = sub.add_parser("track", help="track one sequence and write a result file")
    p_track.add_argument("--seq", required=True, help="OTB-layout sequence directory")
    p_track.add_argument(
        "--variant", default="rcacf", choices=list(PRESET_NAMES) + ["custom"]
    )
    p_track.add_argument("--out", required=True, help="result file to write")
    p_track.add_argument("--attributes", default=None, help="attribute sidecar file")
    _add_common(p_track)
    _add_config_flags(p_track)
    p_track.set_defaults(func=cmd_track)

    p_eval = sub.add_parser("eval", help="score result files against ground truth")
    p_eval.add_argument("--results", required=True, nargs="+", help="result files or globs")
    p_eval.add_argument("--meta", required=True, nargs="+", help="sequence dirs or their parents")
    p_eval.add_argument("--out", required=True, help="report output directory")
    p_eval.add_argument("--attributes", default=None, help="attribute sidecar file")
    _add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_bench = sub.add_parser("bench", help="run a manifest of sequences x variants")
    p_bench.add_argument("--manifest", required=True, help="JSON run manifest")
    p_bench.add_argument("--out", default=None, help="override manifest output_dir")
    _add_common(p_bench)
    p_bench.set_defaults(func=cmd_bench)

    p_synth = sub.add_parser("synth", help="render a synthetic sequence to OTB layout")
    p_synth.add_argument("--spec", required=True, help="JSON synthetic-sequence spec")
    p_synth.add_argument("--out", required=True, help="sequence directory to create")
    _add_common(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ParameterError, LoadError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
