"""Command-line entry point: generate, augment, stats, evaluate, validate.

Settings resolve as command-line flag > config file (TOML or JSON) > default;
the resolved values and their sources are printed to stderr before a run.
Exit codes: 0 success, 1 dataset violations, 2 configuration or IO errors.
"""

from __future__ import annotations

import argparse
import enum
import json
import sys
import time
from pathlib import Path

from .dataset import FormatError, InvariantViolation, MANIFEST, canvas_shape, iter_dataset, read_dataset, record_problems, write_manifest, write_record
from .differ import DiffKind, DiffSet, diff_stats, stats_csv
from .factors import FactorConfig, FovGeometry
from .generator import ExhaustedAttempts, GenConfig
from .graph import DagPair, DensityClass, read_graphml
from .metrics import evaluate, read_predictions, targets_from_records
from .pipeline import RunConfig, generate_dataset, pair_records
from .render import RenderStyle

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class Command(enum.Enum):
    GENERATE = "generate"
    AUGMENT = "augment"
    STATS = "stats"
    EVALUATE = "evaluate"
    VALIDATE = "validate"


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "class": "tree",
    "n": 100,
    "seed": 0,
    "changes_min": 1,
    "changes_max": 8,
    "px_per_mm": 3.5,
    "jobs": 1,
    "iou_thr": 0.5,
    "score_thr": 0.92,
    "interpolation": "envelope",
    "out": "out",
}

# settings each command reads
USES = {
    Command.GENERATE: ("class", "n", "seed", "changes_min", "changes_max", "px_per_mm", "jobs", "out"),
    Command.AUGMENT: ("px_per_mm", "out"),
    Command.STATS: (),
    Command.EVALUATE: ("iou_thr", "score_thr", "interpolation"),
    Command.VALIDATE: (),
}


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        raw = json.loads(text) if p.suffix == ".json" else tomllib.loads(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse config {p}: {exc}") from exc
    cfg = {k.replace("-", "_"): v for k, v in raw.items()}
    unknown = sorted(set(cfg) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown config keys {unknown} in {p}")
    return cfg


def resolve(args: argparse.Namespace, command: Command) -> dict[str, tuple[object, str]]:
    """Each setting the command uses, with where its value came from."""
    cfg = load_config(args.config)
    out = {}
    for key in USES[command]:
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = (flag, "flag")
        elif key in cfg:
            out[key] = (cfg[key], "config")
        else:
            out[key] = (DEFAULTS[key], "default")
    return out


def _header(command: Command, settings: dict) -> None:
    parts = [f"{k}={v!r} ({src})" for k, (v, src) in settings.items()]
    print(f"[{command.value}] " + ", ".join(parts), file=sys.stderr)


def _classes(value: str) -> list[DensityClass]:
    if value == "both":
        return [DensityClass.TREE_LIKE, DensityClass.SPARSE]
    try:
        return [DensityClass(value)]
    except ValueError:
        raise ConfigError(f"class must be tree, sparse or both, not {value!r}") from None


def _factors(px_per_mm: float) -> FactorConfig:
    return FactorConfig(geom=FovGeometry(px_per_mm=float(px_per_mm)))


# ------------------------------------------------------------------- commands


def cmd_generate(args, s: dict) -> int:
    v = {k: val for k, (val, _) in s.items()}
    out = Path(v["out"])
    for cls in _classes(v["class"]):
        try:
            gen = GenConfig(density_class=cls, n_pairs=int(v["n"]), seed=int(v["seed"]), changes_min=int(v["changes_min"]), changes_max=int(v["changes_max"]))
            run = RunConfig(gen, _factors(v["px_per_mm"]))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        t0 = time.perf_counter()
        docs = generate_dataset(run, out / cls.value, jobs=int(v["jobs"]))
        counts = {kind.value: _count(doc) for kind, doc in docs.items()}
        summary = {"class": cls.value, "pairs": gen.n_pairs, "seconds": round(time.perf_counter() - t0, 1), "diffs": counts}
        print(json.dumps(summary))
    return 0


def _count(doc: dict) -> dict:
    recs = doc["records"]
    return {
        "records": len(recs),
        "nodes": sum(len(r["diff"]["nodes"]) for r in recs),
        "edges": sum(len(r["diff"]["edges"]) for r in recs),
        "instances": sum(len(r["masks"]) for r in recs),
    }


def _manifest_json(directory: Path) -> dict:
    try:
        return json.loads((directory / MANIFEST).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read {directory / MANIFEST}: {exc}") from exc


def cmd_augment(args, s: dict) -> int:
    """Recompute all three difference sets for the pairs of an existing class directory."""
    v = {k: val for k, (val, _) in s.items()}
    src = Path(args.source)
    doc = _manifest_json(src / DiffKind.GT.value)
    old = doc["config"]
    style = RenderStyle(**{**old.get("render", {}), "size": tuple(old.get("render", {}).get("size", (800, 800)))})
    fcfg = _factors(v["px_per_mm"])
    out = Path(v["out"])
    for kind in DiffKind:
        (out / kind.value).mkdir(parents=True, exist_ok=True)
    (out / "pairs").mkdir(parents=True, exist_ok=True)
    entries: dict[DiffKind, list] = {k: [] for k in DiffKind}
    for i, e in enumerate(doc["records"]):
        base = read_graphml(src / DiffKind.GT.value / e["graphml_base"])
        alt = read_graphml(src / DiffKind.GT.value / e["graphml_alt"])
        records = pair_records(DagPair(base, alt, int(e["seed"])), fcfg, style)
        for kind, rec in records.items():
            entries[kind].append(write_record(rec, i, out / kind.value, out / "pairs", write_pairs=kind is DiffKind.GT))
    snapshot = RunConfig(GenConfig(), fcfg, style).snapshot()
    snapshot["generator"] = old.get("generator", {})
    for kind in DiffKind:
        doc_k = write_manifest(entries[kind], {**snapshot, "kind": kind.value}, out / kind.value)
        print(json.dumps({"kind": kind.value, **_count(doc_k)}))
    return 0


def cmd_stats(args, s: dict) -> int:
    """Diff-count curves of a class directory: GT against human-like and random(GT)."""
    src = Path(args.source)
    gt_doc = _manifest_json(src / DiffKind.GT.value)

    def sets(doc, kind):
        return [DiffSet(frozenset(r["diff"]["nodes"]), frozenset(tuple(e) for e in r["diff"]["edges"]), kind) for r in doc["records"]]

    gts = sets(gt_doc, DiffKind.GT)
    rows = []
    for kind in (DiffKind.HUMAN_LIKE, DiffKind.RANDOM_GT):
        others = sets(_manifest_json(src / kind.value), kind)
        if len(others) != len(gts):
            raise ConfigError(f"{kind.value} has {len(others)} records, gt has {len(gts)}")
        new = diff_stats(list(zip(gts, others)))
        rows += [r for r in new if not (rows and r.kind.startswith("gt_"))]
    text = stats_csv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_evaluate(args, s: dict) -> int:
    v = {k: val for k, (val, _) in s.items()}
    try:
        manifest = read_dataset(args.dataset)
        preds = read_predictions(args.predictions)
    except (OSError, FormatError, InvariantViolation, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    targets = targets_from_records(manifest.records)
    report = evaluate(preds, targets, float(v["iou_thr"]), float(v["score_thr"]), v["interpolation"])
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json(), encoding="utf-8")
        (out / "pr_curve.csv").write_text(report.pr_csv(), encoding="utf-8")
    sys.stdout.write(report.to_json())
    return 0


def cmd_validate(args, s: dict) -> int:
    root = Path(args.source)
    manifests = sorted(p.parent for p in root.rglob(MANIFEST)) if root.is_dir() else []
    if not manifests:
        raise ConfigError(f"no {MANIFEST} under {root}")
    violations = 0
    for d in manifests:
        bad = count = 0
        try:
            cfg, records = iter_dataset(d)
            h, w = canvas_shape(cfg)
            style = RenderStyle(**{**cfg.get("render", {}), "size": (w, h)})
            cls_name = cfg.get("generator", {}).get("density_class")
            cls = DensityClass(cls_name) if cls_name else None
            kind = cfg.get("kind")
            for i, rec in enumerate(records):
                count += 1
                problems = record_problems(rec, style, cls)
                if kind and rec.kind.value != kind:
                    problems.append(f"record kind {rec.kind.value} in a {kind} dataset")
                for p in problems:
                    print(f"{d}: record {i}: {p}")
                bad += bool(problems)
        except (FormatError, InvariantViolation) as exc:
            print(f"{d}: {exc}")
            bad += 1
        print(f"{d}: {count} records checked, {bad} with violations", file=sys.stderr)
        violations += bad
    return 1 if violations else 0


HANDLERS = {
    Command.GENERATE: cmd_generate,
    Command.AUGMENT: cmd_augment,
    Command.STATS: cmd_stats,
    Command.EVALUATE: cmd_evaluate,
    Command.VALIDATE: cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dagdiff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="TOML or JSON file with default settings")
        return p

    g = common(sub.add_parser("generate", help="synthesize annotated DAG-pair datasets"))
    g.add_argument("--class", dest="class", choices=["tree", "sparse", "both"])
    g.add_argument("--n", type=int, help="pairs per class")
    g.add_argument("--seed", type=int)
    g.add_argument("--changes-min", dest="changes_min", type=int)
    g.add_argument("--changes-max", dest="changes_max", type=int)
    g.add_argument("--px-per-mm", dest="px_per_mm", type=float)
    g.add_argument("--jobs", type=int)
    g.add_argument("--out", help="output root; one subdirectory per class")

    a = common(sub.add_parser("augment", help="recompute difference sets for existing pairs"))
    a.add_argument("source", help="class directory written by generate")
    a.add_argument("--px-per-mm", dest="px_per_mm", type=float)
    a.add_argument("--out")

    s = common(sub.add_parser("stats", help="diff-count curves as CSV"))
    s.add_argument("source", help="class directory written by generate")
    s.add_argument("--out", help="CSV path (default: stdout)")

    e = common(sub.add_parser("evaluate", help="score predictions against a dataset"))
    e.add_argument("dataset", help="dataset directory containing targets.json")
    e.add_argument("predictions", help="JSON array of predictions")
    e.add_argument("--iou-thr", dest="iou_thr", type=float)
    e.add_argument("--score-thr", dest="score_thr", type=float)
    e.add_argument("--interpolation", choices=["envelope", "trapezoid"])
    e.add_argument("--out", help="directory for report.json and pr_curve.csv")

    v = common(sub.add_parser("validate", help="check every dataset invariant"))
    v.add_argument("source", help="dataset, class or output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = Command(args.command)
    try:
        settings = resolve(args, command)
        _header(command, settings)
        return HANDLERS[command](args, settings)
    except (ConfigError, ExhaustedAttempts) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
