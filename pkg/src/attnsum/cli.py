"""Command-line front end.

Commands: summarize, compare, heatmap, inspect-weights. Flag values win over
config-file values, which win over defaults. Exit codes: 0 success (warnings
allowed), 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from .baselines import KMEANS_SEED, Budget, similarity_graph
from .corpus import Document, RawNote, Vocabulary, build_document, load_corpus
from .errors import AttnsumError, EmptyCorpus, WeightFormatError
from .evaluate import compare as compare_corpus, run_method
from .summarizer import METHOD_ATTENTION, METHODS, summarize, summary_to_dict
from .viz import emit_html, emit_neatvision_json, make_heatmap_doc
from .weights import WeightStore, load_weights, read_manifest

log = logging.getLogger("attnsum")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


class ConfigurationError(Exception):
    pass


def _setup_logging() -> None:
    level = _LOG_LEVELS.get(os.environ.get("ATTNSUM_LOG", "warn").lower(),
                            logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _resolve(flags: dict, config_path: str | None) -> dict:
    """Merge defaults <- config file <- explicit flags."""
    resolved = {
        "methods": "attention",
        "budget": "match",
        "alpha": 0.5,
        "threads": os.cpu_count() or 1,
        "seed": KMEANS_SEED,
    }
    if config_path:
        path = Path(config_path)
        if not path.is_file():
            raise ConfigurationError(f"config file not found: {path}")
        try:
            file_values = json.loads(path.read_text("utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigurationError("config file must contain a JSON object")
        resolved.update(file_values)
    resolved.update({k: v for k, v in flags.items() if v is not None})
    return resolved


def _parse_methods(spec: str) -> list[str]:
    if spec.strip().lower() == "all":
        return list(METHODS)
    methods = [m.strip().lower() for m in spec.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS:
            raise ConfigurationError(
                f"unknown method {m!r}; choose from {', '.join(METHODS)} or 'all'")
    if not methods:
        raise ConfigurationError("no methods requested")
    return methods


def _parse_budget(spec: str) -> tuple[Budget | None, float | None]:
    """Returns (fixed_budget, ratio); both None means length-matched."""
    spec = spec.strip().lower()
    if spec == "match":
        return None, None
    if spec.startswith("k="):
        try:
            k = int(spec[2:])
        except ValueError:
            raise ConfigurationError(f"bad budget {spec!r}") from None
        if k < 1:
            raise ConfigurationError("budget k must be >= 1")
        return Budget(k=k), None
    if spec.startswith("ratio="):
        try:
            ratio = float(spec[6:])
        except ValueError:
            raise ConfigurationError(f"bad budget {spec!r}") from None
        if not 0.0 < ratio <= 1.0:
            raise ConfigurationError("budget ratio must lie in (0, 1]")
        return None, ratio
    raise ConfigurationError(f"bad budget {spec!r}; use match, k=N or ratio=R")


def _load_inputs(cfg: dict, need_weights: bool = True
                 ) -> tuple[list[RawNote], Vocabulary, WeightStore | None]:
    for key in ("corpus", "vocab") + (("weights",) if need_weights else ()):
        if not cfg.get(key):
            raise ConfigurationError(f"--{key} is required")
        if not Path(cfg[key]).is_file():
            raise ConfigurationError(f"{key} file not found: {cfg[key]}")
    if not cfg.get("out"):
        raise ConfigurationError("--out is required")

    notes = load_corpus(cfg["corpus"])
    if not notes:
        raise EmptyCorpus(f"corpus {cfg['corpus']} contains no notes")
    vocab = Vocabulary.from_file(cfg["vocab"])
    store = load_weights(cfg["weights"]) if need_weights else None
    alpha = float(cfg["alpha"])
    if alpha <= 0:
        raise ConfigurationError("--alpha must be positive")
    cfg["alpha"] = alpha
    threads = int(cfg["threads"])
    if threads < 1:
        raise ConfigurationError("--threads must be >= 1")
    cfg["threads"] = threads
    return notes, vocab, store


def _build_documents(notes: list[RawNote]) -> list[Document]:
    return [build_document(note) for note in notes]


_shared_options = [
    click.option("--weights", type=str, default=None, help="Weight file path."),
    click.option("--corpus", type=str, default=None, help="JSON-lines corpus path."),
    click.option("--vocab", type=str, default=None, help="Vocabulary file path."),
    click.option("--out", type=str, default=None, help="Output directory."),
    click.option("--methods", type=str, default=None,
                 help="Comma-separated methods or 'all'."),
    click.option("--budget", type=str, default=None,
                 help="Baseline budget: match, k=N or ratio=R."),
    click.option("--alpha", type=float, default=None, help="Smoothing constant."),
    click.option("--threads", type=int, default=None, help="Worker threads."),
    click.option("--seed", type=int, default=None, help="Clustering seed."),
    click.option("--config", "config_path", type=str, default=None,
                 help="JSON config file; flags override it."),
]


def shared_options(fn):
    for option in reversed(_shared_options):
        fn = option(fn)
    return fn


@click.group()
def main():
    """Extractive clinical-note summarization via encoder attention."""
    _setup_logging()


def _run(body, flags: dict, config_path: str | None) -> None:
    try:
        cfg = _resolve(flags, config_path)
        code = body(cfg)
    except (ConfigurationError, EmptyCorpus) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (AttnsumError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    sys.exit(code)


def _graph_dump(doc: Document) -> tuple[str, str]:
    graph = similarity_graph(doc)
    payload = json.dumps({"note_id": doc.note_id, "n": graph.n,
                          "weights": graph.weights.tolist()}, sort_keys=True)
    return f"{doc.note_id}.graph.json", payload


@main.command("summarize")
@shared_options
@click.option("--dump-graph", is_flag=True, default=False,
              help="Also write each note's sentence-similarity graph as JSON.")
def cmd_summarize(config_path, dump_graph, **flags):
    """Write one summary JSON per note and method."""

    def body(cfg: dict) -> int:
        methods = _parse_methods(cfg["methods"])
        fixed_budget, ratio = _parse_budget(cfg["budget"])
        notes, vocab, store = _load_inputs(cfg)
        out_dir = Path(cfg["out"])
        out_dir.mkdir(parents=True, exist_ok=True)
        docs = _build_documents(notes)

        def work(doc: Document) -> tuple[list[tuple[str, str]], list[str]]:
            files: list[tuple[str, str]] = []
            problems: list[str] = []
            attention = None
            try:
                attention = summarize(doc, store, vocab)
                problems.extend(f"{doc.note_id}: {w}" for w in attention.warnings)
            except Exception as exc:  # noqa: BLE001
                problems.append(f"{doc.note_id}: attention failed: {exc}")
            if fixed_budget is not None:
                budget = fixed_budget
            elif ratio is not None:
                budget = Budget(k=max(1, math.ceil(ratio * len(doc.sentences))))
            elif attention is not None:
                budget = Budget(k=len(attention.selected))
            else:
                budget = Budget(k=max(1, math.ceil(0.3 * len(doc.sentences))))
            for method in methods:
                try:
                    if method == METHOD_ATTENTION:
                        if attention is None:
                            continue
                        summary = attention
                    else:
                        summary = run_method(method, doc, store, vocab,
                                                budget, seed=cfg["seed"])
                    payload = json.dumps(summary_to_dict(summary, doc),
                                         sort_keys=True, indent=2)
                    files.append((f"{doc.note_id}.{method}.json", payload))
                except Exception as exc:  # noqa: BLE001
                    problems.append(f"{doc.note_id}: {method} failed: {exc}")
            if dump_graph:
                try:
                    files.append(_graph_dump(doc))
                except Exception as exc:  # noqa: BLE001
                    problems.append(f"{doc.note_id}: graph dump failed: {exc}")
            return files, problems

        with ThreadPoolExecutor(max_workers=int(cfg["threads"])) as pool:
            results = list(pool.map(work, docs))
        for files, problems in results:
            for filename, payload in files:
                (out_dir / filename).write_text(payload + "\n", "utf-8")
            for problem in problems:
                click.echo(f"warning: {problem}", err=True)
        wrote = sum(len(files) for files, _ in results)
        if wrote == 0:
            click.echo("error: no summaries produced", err=True)
            return EXIT_RUNTIME
        log.info("wrote %d summaries to %s", wrote, out_dir)
        return EXIT_OK

    _run(body, flags, config_path)


@main.command("compare")
@shared_options
@click.option("--series", is_flag=True, default=False,
              help="Also write per-note divergence series for plotting.")
@click.option("--dump-graph", is_flag=True, default=False,
              help="Also write each note's sentence-similarity graph as JSON.")
def cmd_compare(config_path, series, dump_graph, **flags):
    """Score summaries against originals; write a CSV and JSON report."""

    def body(cfg: dict) -> int:
        methods = _parse_methods(cfg["methods"])
        fixed_budget, ratio = _parse_budget(cfg["budget"])
        notes, vocab, store = _load_inputs(cfg)
        out_dir = Path(cfg["out"])
        out_dir.mkdir(parents=True, exist_ok=True)
        docs = _build_documents(notes)

        if dump_graph:
            for doc in docs:
                try:
                    filename, payload = _graph_dump(doc)
                    (out_dir / filename).write_text(payload + "\n", "utf-8")
                except Exception as exc:  # noqa: BLE001
                    click.echo(f"warning: {doc.note_id}: graph dump failed: {exc}",
                               err=True)

        report = compare_corpus(docs, methods, store, vocab, alpha=cfg["alpha"],
                            fixed_budget=fixed_budget, ratio=ratio,
                            seed=cfg["seed"], threads=int(cfg["threads"]))

        csv_path = out_dir / "report.csv"
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["note_id", "method", "kld", "jsd", "summary_len"])
            for row in report.rows:
                if row.error is None:
                    writer.writerow([row.note_id, row.method,
                                     repr(row.kld), repr(row.jsd), row.summary_len])

        json_payload = {
            "means": report.means,
            "rows": [
                {"note_id": r.note_id, "method": r.method, "kld": r.kld,
                 "jsd": r.jsd, "summary_len": r.summary_len, "error": r.error}
                for r in report.rows
            ],
        }
        (out_dir / "report.json").write_text(
            json.dumps(json_payload, sort_keys=True, indent=2) + "\n", "utf-8")
        if series:
            (out_dir / "series.json").write_text(
                json.dumps(report.series(), sort_keys=True, indent=2) + "\n", "utf-8")

        errors = [r for r in report.rows if r.error is not None]
        for r in errors:
            click.echo(f"warning: {r.note_id}/{r.method}: {r.error}", err=True)
        if len(errors) == len(report.rows):
            click.echo("error: every note failed", err=True)
            return EXIT_RUNTIME
        return EXIT_OK

    _run(body, flags, config_path)


@main.command("heatmap")
@shared_options
def cmd_heatmap(config_path, **flags):
    """Write a heat-map JSON and HTML per note from attention scores."""

    def body(cfg: dict) -> int:
        notes, vocab, store = _load_inputs(cfg)
        out_dir = Path(cfg["out"])
        out_dir.mkdir(parents=True, exist_ok=True)
        docs = _build_documents(notes)

        def work(doc: Document):
            summary = summarize(doc, store, vocab)
            heat = make_heatmap_doc(doc.note_id,
                                    [s.raw for s in doc.sentences],
                                    summary.scores)
            return heat, summary.warnings

        with ThreadPoolExecutor(max_workers=int(cfg["threads"])) as pool:
            results = list(pool.map(work, docs))
        for heat, warnings in results:
            (out_dir / f"{heat.note_id}.nv.json").write_text(
                emit_neatvision_json(heat) + "\n", "utf-8")
            (out_dir / f"{heat.note_id}.heatmap.html").write_text(
                emit_html(heat), "utf-8")
            for w in warnings:
                click.echo(f"warning: {heat.note_id}: {w}", err=True)
        return EXIT_OK

    _run(body, flags, config_path)


@main.command("inspect-weights")
@click.option("--weights", type=str, required=True, help="Weight file path.")
def cmd_inspect_weights(weights):
    """Print the manifest table and configuration; validate the file."""
    _setup_logging()
    if not Path(weights).is_file():
        click.echo(f"error: weights file not found: {weights}", err=True)
        sys.exit(EXIT_CONFIG)
    try:
        config, entries = read_manifest(weights)
        load_weights(weights)  # full invariant check
    except WeightFormatError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    click.echo(f"config: layers={config.num_layers} heads={config.num_heads} "
               f"hidden={config.hidden_size} intermediate={config.intermediate_size} "
               f"vocab={config.vocab_size} max_positions={config.max_positions} "
               f"ln_eps={config.layer_norm_epsilon:g}")
    click.echo(f"tensors: {len(entries)}")
    name_width = max(len(e["name"]) for e in entries)
    for e in entries:
        shape = "x".join(str(d) for d in e["shape"])
        click.echo(f"  {e['name']:<{name_width}}  {shape:>12}  @{e['offset']}")
    sys.exit(EXIT_OK)


if __name__ == "__main__":
    main()
