"""Command-line interface.

Subcommands: validate, stats, coverage, iaa, wsd-eval, serve, convert.
Given fixed inputs and options every command prints byte-identical output:
stable ordering everywhere, percentages to one decimal in human tables,
agreement metrics to two decimals, full precision in --out files. Report
commands accept --figures DIR to render charts next to the delimited
output.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import formats
from .errors import WorkbenchError
from .evaluation import SkipReason, sweep
from .iaa import METRIC_NAMES, iaa_report
from .model import (
    Corpus,
    EntityType,
    SYSTEM_INVENTORY_ID,
    TokenClass,
    with_system_inventory,
)
from .scorers import DeterministicPseudoScorer, GoldOracleScorer, RemoteTsvScorer
from .validation import corpus_statistics, coverage_report, validate as validate_annotations
from .wsd import LemmaMode, TargetMarkup

_WINDOW_CHOICES = ("all", "3", "5", "7", "9", "11")


def _fail(exc: BaseException) -> None:
    """Print a machine-parsable error record and exit nonzero."""
    record = {"error": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(record, ensure_ascii=False), err=True)
    sys.exit(1)


def _guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (WorkbenchError, OSError, ValueError) as exc:
        _fail(exc)


def _parse_lexicon_options(pairs: tuple[str, ...]) -> dict:
    inventories = {}
    for pair in pairs:
        inventory_id, _, path = pair.partition("=")
        if not inventory_id or not path:
            raise ValueError(f"--lexicon expects ID=PATH, got {pair!r}")
        inventories[inventory_id] = formats.load_inventory(path, inventory_id)
    return with_system_inventory(inventories)


def _load_lemma_lookup(path: str | None) -> dict[str, str]:
    if path is None:
        return {}
    table = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'surface<TAB>lemma_id'")
            table[fields[0]] = fields[1]
    return table


def _load_assignments(path: str | None) -> dict[str, tuple[str, ...]]:
    if path is None:
        return {}
    assignments = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            assignments[record["annotator_id"]] = tuple(record["words"])
    return assignments


def _format_table(headers: tuple[str, ...], rows: list[tuple[str, ...]]) -> str:
    widths = [len(header) for header in headers]
    for row in rows:
        for index, cell in enumerate(row):
            widths[index] = max(widths[index], len(cell))
    lines = []
    for row in (headers, tuple("-" * w for w in widths), *rows):
        cells = []
        for index, cell in enumerate(row):
            if index == 0:
                cells.append(cell.ljust(widths[index]))
            else:
                cells.append(cell.rjust(widths[index]))
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def _percent(value: float) -> str:
    return f"{100 * value:.1f}"


def _write_json(path: Path, payload) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, indent=2, sort_keys=True)
        handle.write("\n")


def _write_tsv(path: Path, headers: tuple[str, ...], rows: list[tuple[str, ...]]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\t".join(headers) + "\n")
        for row in rows:
            handle.write("\t".join(row) + "\n")


def _write_out(path_text: str, payload, headers, rows) -> None:
    path = Path(path_text)
    if path.suffix == ".tsv":
        _write_tsv(path, headers, rows)
    else:
        _write_json(path, payload)


@click.group()
def main() -> None:
    """Workbench for scored multi-sense annotation and gloss-ranking WSD."""


# --- validate -------------------------------------------------------------

@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicons", multiple=True, required=True, metavar="ID=PATH")
@click.option("--out", "out_path", default=None, help="write flags to .json or .tsv")
def validate(corpus_path, annotations_path, lexicons, out_path) -> None:
    """Run the three review rules; flags are advisory (exit code stays 0)."""

    def run() -> None:
        corpus = formats.load_corpus(corpus_path)
        annotations = formats.load_annotations(annotations_path)
        inventories = _parse_lexicon_options(lexicons)
        flags = validate_annotations(corpus, annotations, inventories)
        click.echo(f"{len(flags)} flags")
        headers = ("rule", "sentence", "position", "inventory", "annotator", "details")
        rows = [
            (
                flag.rule.value,
                flag.sentence_id,
                str(flag.token_position),
                flag.inventory_id,
                flag.annotator_id,
                flag.details,
            )
            for flag in flags
        ]
        if rows:
            click.echo(_format_table(headers, rows))
        if out_path:
            payload = [
                {
                    "rule": flag.rule.value,
                    "sentence_id": flag.sentence_id,
                    "token_position": flag.token_position,
                    "inventory_id": flag.inventory_id,
                    "annotator_id": flag.annotator_id,
                    "details": flag.details,
                }
                for flag in flags
            ]
            _write_out(out_path, payload, headers, rows)

    _guard(run)


# --- stats ----------------------------------------------------------------

@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", default=None, type=click.Path(exists=True))
@click.option("--entities", "entities_path", default=None, type=click.Path(exists=True))
@click.option("--out", "out_path", default=None, help="write the tallies to .json or .tsv")
@click.option("--figures", "figures_dir", default=None, help="render charts into this directory")
def stats(corpus_path, annotations_path, entities_path, out_path, figures_dir) -> None:
    """Corpus tallies per token class, plus entity-mention counts."""

    def run() -> None:
        corpus = formats.load_corpus(corpus_path)
        annotations = (
            formats.load_annotations(annotations_path) if annotations_path else ()
        )
        mentions = formats.load_mentions(entities_path) if entities_path else ()
        result = corpus_statistics(corpus, annotations, mentions)

        headers = ("class", "tokens", "unique tokens", "unique lemmas", "unique senses")
        rows = []
        for cls in TokenClass:
            stats_ = result.per_class[cls]
            rows.append(
                (
                    cls.value,
                    str(stats_.tokens),
                    str(stats_.unique_tokens),
                    str(stats_.unique_lemmas),
                    str(stats_.unique_senses),
                )
            )
        rows.append(
            (
                "total",
                str(result.total.tokens),
                str(result.total.unique_tokens),
                str(result.total.unique_lemmas),
                str(result.total.unique_senses),
            )
        )
        click.echo(_format_table(headers, rows))

        entity_rows = []
        if result.entity_total.mentions:
            click.echo("")
            entity_headers = ("entity type", "mentions", "tokens")
            entity_rows = [
                (
                    entity_type.value,
                    str(result.per_entity_type[entity_type].mentions),
                    str(result.per_entity_type[entity_type].tokens),
                )
                for entity_type in EntityType
            ]
            entity_rows.append(
                (
                    "total",
                    str(result.entity_total.mentions),
                    str(result.entity_total.tokens),
                )
            )
            click.echo(_format_table(entity_headers, entity_rows))

        if out_path:
            payload = {
                "per_class": {
                    cls.value: {
                        "tokens": result.per_class[cls].tokens,
                        "unique_tokens": result.per_class[cls].unique_tokens,
                        "unique_lemmas": result.per_class[cls].unique_lemmas,
                        "unique_senses": result.per_class[cls].unique_senses,
                    }
                    for cls in TokenClass
                },
                "total": {
                    "tokens": result.total.tokens,
                    "unique_tokens": result.total.unique_tokens,
                    "unique_lemmas": result.total.unique_lemmas,
                    "unique_senses": result.total.unique_senses,
                },
                "entities": {
                    entity_type.value: {
                        "mentions": result.per_entity_type[entity_type].mentions,
                        "tokens": result.per_entity_type[entity_type].tokens,
                    }
                    for entity_type in EntityType
                },
                "entity_total": {
                    "mentions": result.entity_total.mentions,
                    "tokens": result.entity_total.tokens,
                },
            }
            _write_out(out_path, payload, headers, rows)
        if figures_dir:
            from . import figures

            for path in figures.save_stats_figures(result, figures_dir):
                click.echo(f"wrote {path}")

    _guard(run)


# --- coverage ---------------------------------------------------------------

@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicons", multiple=True, required=True, metavar="ID=PATH")
@click.option("--inventory", "inventory_ids", multiple=True, help="default: all loaded")
@click.option("--out", "out_path", default=None)
@click.option("--figures", "figures_dir", default=None)
def coverage(corpus_path, annotations_path, lexicons, inventory_ids, out_path, figures_dir) -> None:
    """How much of the annotated material each inventory accounts for."""

    def run() -> None:
        corpus = formats.load_corpus(corpus_path)
        annotations = formats.load_annotations(annotations_path)
        catalog = _parse_lexicon_options(lexicons)
        targets = list(inventory_ids) or sorted(
            inventory_id for inventory_id in catalog if inventory_id != SYSTEM_INVENTORY_ID
        )
        reports = []
        for inventory_id in targets:
            if inventory_id not in catalog:
                raise ValueError(f"inventory {inventory_id!r} was not loaded")
            reports.append(
                coverage_report(corpus, annotations, catalog[inventory_id], catalog)
            )

        headers = ("inventory", "lemmas", "senses excl. proper", "proper-noun senses")
        rows = [
            (
                report.inventory_id,
                f"{_percent(report.lemmas.ratio)}% "
                f"({report.lemmas.covered}/{report.lemmas.total})",
                f"{_percent(report.senses_excluding_proper.ratio)}% "
                f"({report.senses_excluding_proper.covered}/{report.senses_excluding_proper.total})",
                f"{_percent(report.proper_noun_senses.ratio)}% "
                f"({report.proper_noun_senses.covered}/{report.proper_noun_senses.total})",
            )
            for report in reports
        ]
        click.echo(_format_table(headers, rows))

        if out_path:
            payload = [
                {
                    "inventory_id": report.inventory_id,
                    "lemmas": {
                        "covered": report.lemmas.covered,
                        "total": report.lemmas.total,
                        "ratio": report.lemmas.ratio,
                    },
                    "senses_excluding_proper": {
                        "covered": report.senses_excluding_proper.covered,
                        "total": report.senses_excluding_proper.total,
                        "ratio": report.senses_excluding_proper.ratio,
                    },
                    "proper_noun_senses": {
                        "covered": report.proper_noun_senses.covered,
                        "total": report.proper_noun_senses.total,
                        "ratio": report.proper_noun_senses.ratio,
                    },
                }
                for report in reports
            ]
            _write_out(out_path, payload, headers, rows)
        if figures_dir:
            from . import figures

            for path in figures.save_coverage_figure(reports, figures_dir):
                click.echo(f"wrote {path}")

    _guard(run)


# --- iaa -------------------------------------------------------------------

@main.command()
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True))
@click.option("--pair", "pairs", multiple=True, metavar="A,B", help="default: every overlapping pair")
@click.option("--inventory", "inventory_ids", multiple=True, help="default: all annotated")
@click.option(
    "--scale",
    type=click.Choice(("raw", "percent")),
    default="raw",
    help="table scale for the kappa family (structured output is always raw)",
)
@click.option("--out", "out_path", default=None)
@click.option("--figures", "figures_dir", default=None)
def iaa(annotations_path, pairs, inventory_ids, scale, out_path, figures_dir) -> None:
    """Inter-annotator agreement over double-scored items."""

    def run() -> None:
        annotations = formats.load_annotations(annotations_path)
        annotator_pairs = None
        if pairs:
            annotator_pairs = []
            for pair in pairs:
                names = [name.strip() for name in pair.split(",")]
                if len(names) != 2 or not all(names):
                    raise ValueError(f"--pair expects 'A,B', got {pair!r}")
                annotator_pairs.append((names[0], names[1]))
        report = iaa_report(
            annotations,
            annotator_pairs=annotator_pairs,
            inventory_ids=list(inventory_ids) or None,
        )

        def render(name: str, value: float) -> str:
            if scale == "percent" and name in ("kappa", "lwk", "qwk"):
                value *= 100
            return f"{value:.2f}"

        blocks = []
        for inventory_id in report.inventories():
            results = report.results_for(inventory_id)
            summary = report.summary(inventory_id)
            headers = (
                "metric",
                *(f"{r.annotator_a},{r.annotator_b}" for r in results),
                "mean",
                "std",
            )
            rows = [
                (
                    name,
                    *(render(name, r.metric(name)) for r in results),
                    render(name, summary[name].mean),
                    render(name, summary[name].std),
                )
                for name in METRIC_NAMES
            ]
            paired = (
                "paired items",
                *(str(r.paired_items) for r in results),
                "",
                "",
            )
            unpaired = (
                "unpaired items",
                *(str(r.unpaired_items) for r in results),
                "",
                "",
            )
            blocks.append(
                f"inventory: {inventory_id}\n"
                + _format_table(headers, rows + [paired, unpaired])
            )
        click.echo("\n\n".join(blocks))

        if out_path:
            payload = {
                "pairs": [
                    {
                        "annotator_a": r.annotator_a,
                        "annotator_b": r.annotator_b,
                        "inventory_id": r.inventory_id,
                        "paired_items": r.paired_items,
                        "unpaired_items": r.unpaired_items,
                        **{name: r.metric(name) for name in METRIC_NAMES},
                    }
                    for r in report.pair_results
                ],
                "summary": {
                    inventory_id: {
                        name: {
                            "mean": report.summary(inventory_id)[name].mean,
                            "std": report.summary(inventory_id)[name].std,
                        }
                        for name in METRIC_NAMES
                    }
                    for inventory_id in report.inventories()
                },
            }
            tsv_headers = (
                "inventory",
                "annotator_a",
                "annotator_b",
                "paired_items",
                "unpaired_items",
                *METRIC_NAMES,
            )
            tsv_rows = [
                (
                    r.inventory_id,
                    r.annotator_a,
                    r.annotator_b,
                    str(r.paired_items),
                    str(r.unpaired_items),
                    *(repr(r.metric(name)) for name in METRIC_NAMES),
                )
                for r in report.pair_results
            ]
            _write_out(out_path, payload, tsv_headers, tsv_rows)
        if figures_dir:
            from . import figures

            for path in figures.save_iaa_figures(report, figures_dir):
                click.echo(f"wrote {path}")

    _guard(run)


# --- wsd-eval ----------------------------------------------------------------

def _build_scorer(spec: str, annotations, threshold: int, timeout: float, batch_size: int):
    kind, _, argument = spec.partition(":")
    if kind == "gold-oracle":
        return GoldOracleScorer.from_annotations(annotations, threshold=threshold)
    if kind == "adversarial":
        return GoldOracleScorer.from_annotations(
            annotations, threshold=threshold, invert=True
        )
    if kind == "pseudo":
        return DeterministicPseudoScorer(seed=argument or 0)
    if kind == "remote":
        if not argument:
            raise ValueError("remote scorer spec must be 'remote:URL'")
        return RemoteTsvScorer(argument, timeout=timeout, batch_size=batch_size)
    raise ValueError(
        f"unknown scorer {spec!r}; use gold-oracle, adversarial, pseudo[:seed], or remote:URL"
    )


@main.command(name="wsd-eval")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--annotations", "annotations_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicons", multiple=True, required=True, metavar="ID=PATH")
@click.option("--inventory", "inventory_ids", multiple=True, help="default: all loaded")
@click.option("--scorer", "scorer_spec", default="gold-oracle", show_default=True)
@click.option(
    "--window",
    "windows",
    multiple=True,
    type=click.Choice(_WINDOW_CHOICES),
    help="repeatable; default: 11",
)
@click.option(
    "--markup",
    type=click.Choice(("scorer", "none", "xml_token", "unused0")),
    default="scorer",
    show_default=True,
    help="'scorer' defers to the scorer's preferred markup",
)
@click.option(
    "--lemma-mode",
    type=click.Choice(("gold", "external")),
    default="gold",
    show_default=True,
)
@click.option("--lookup", "lookup_path", default=None, type=click.Path(exists=True))
@click.option("--entities", "entities_path", default=None, type=click.Path(exists=True))
@click.option("--threshold", default=60, show_default=True)
@click.option("--include-function-words/--no-function-words", default=True)
@click.option("--timeout", default=10.0, show_default=True, help="remote scorer timeout (s)")
@click.option("--batch-size", default=16, show_default=True, help="remote scorer batch size")
@click.option("--out", "out_path", default=None)
@click.option("--figures", "figures_dir", default=None)
def wsd_eval(
    corpus_path,
    annotations_path,
    lexicons,
    inventory_ids,
    scorer_spec,
    windows,
    markup,
    lemma_mode,
    lookup_path,
    entities_path,
    threshold,
    include_function_words,
    timeout,
    batch_size,
    out_path,
    figures_dir,
) -> None:
    """Evaluate the pipeline over the (inventory x window) grid."""

    def run() -> None:
        corpus = formats.load_corpus(corpus_path)
        annotations = formats.load_annotations(annotations_path)
        catalog = _parse_lexicon_options(lexicons)
        targets = list(inventory_ids) or sorted(
            inventory_id for inventory_id in catalog if inventory_id != SYSTEM_INVENTORY_ID
        )
        for inventory_id in targets:
            if inventory_id not in catalog:
                raise ValueError(f"inventory {inventory_id!r} was not loaded")
        inventories = [catalog[inventory_id] for inventory_id in targets]
        window_sizes = [
            None if label == "all" else int(label) for label in (windows or ("11",))
        ]
        mentions = formats.load_mentions(entities_path) if entities_path else ()
        lemma_lookup = _load_lemma_lookup(lookup_path)
        scorer = _build_scorer(scorer_spec, annotations, threshold, timeout, batch_size)

        result = sweep(
            corpus,
            annotations,
            inventories,
            [scorer],
            window_sizes,
            mentions=mentions,
            lemma_lookup=lemma_lookup or None,
            markup=None if markup == "scorer" else TargetMarkup(markup),
            lemma_mode=LemmaMode(lemma_mode),
            correctness_threshold=threshold,
            include_function_words=include_function_words,
        )

        headers = (
            "scorer",
            "inventory",
            "window",
            "top1",
            "top2",
            "top3",
            "noun",
            "verb",
            "func",
            "evaluated",
            "skipped",
        )
        rows = [
            (
                report.scorer_identity,
                report.inventory_id,
                report.window_label,
                _percent(report.top_k_accuracy(1)),
                _percent(report.top_k_accuracy(2)),
                _percent(report.top_k_accuracy(3)),
                _percent(report.class_top1_accuracy(TokenClass.NOUN)),
                _percent(report.class_top1_accuracy(TokenClass.VERB)),
                _percent(report.class_top1_accuracy(TokenClass.FUNCTION_WORD)),
                str(report.evaluated_total),
                str(report.skipped_total),
            )
            for report in result.reports
        ]
        click.echo(_format_table(headers, rows))
        skip_headers = ("scorer", "inventory", "window") + tuple(
            reason.value for reason in SkipReason
        )
        skip_rows = [
            (
                report.scorer_identity,
                report.inventory_id,
                report.window_label,
                *(str(report.skipped[reason]) for reason in SkipReason),
            )
            for report in result.reports
        ]
        click.echo("")
        click.echo(_format_table(skip_headers, skip_rows))
        if result.failures:
            click.echo("")
            click.echo(
                _format_table(
                    ("scorer", "inventory", "window", "error"),
                    [
                        (f.scorer_identity, f.inventory_id, f.window_label, f.error)
                        for f in result.failures
                    ],
                )
            )

        if out_path:
            payload = {
                "reports": [report.to_record() for report in result.reports],
                "failures": [
                    {
                        "scorer": f.scorer_identity,
                        "inventory_id": f.inventory_id,
                        "window": f.window_label,
                        "error": f.error,
                    }
                    for f in result.failures
                ],
            }
            tsv_rows = [
                (
                    report.scorer_identity,
                    report.inventory_id,
                    report.window_label,
                    repr(report.top_k_accuracy(1)),
                    repr(report.top_k_accuracy(2)),
                    repr(report.top_k_accuracy(3)),
                    repr(report.class_top1_accuracy(TokenClass.NOUN)),
                    repr(report.class_top1_accuracy(TokenClass.VERB)),
                    repr(report.class_top1_accuracy(TokenClass.FUNCTION_WORD)),
                    str(report.evaluated_total),
                    str(report.skipped_total),
                )
                for report in result.reports
            ]
            _write_out(out_path, payload, headers, tsv_rows)
        if figures_dir:
            from . import figures

            for path in figures.save_evaluation_figures(result.reports, figures_dir):
                click.echo(f"wrote {path}")

    _guard(run)


# --- serve ---------------------------------------------------------------------

@main.command()
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--lexicon", "lexicons", multiple=True, required=True, metavar="ID=PATH")
@click.option("--data-dir", "data_dir", required=True, type=click.Path())
@click.option("--annotations", "annotations_path", default=None, type=click.Path(exists=True),
              help="seed annotations imported when the store is empty")
@click.option("--entities", "entities_path", default=None, type=click.Path(exists=True))
@click.option("--lookup", "lookup_path", default=None, type=click.Path(exists=True))
@click.option("--assignments", "assignments_path", default=None, type=click.Path(exists=True))
@click.option("--ui", "ui_dir", default=None, type=click.Path(exists=True),
              help="static UI bundle to serve at /")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
def serve(
    corpus_path,
    lexicons,
    data_dir,
    annotations_path,
    entities_path,
    lookup_path,
    assignments_path,
    ui_dir,
    host,
    port,
) -> None:
    """Run the annotation service."""

    def run() -> None:
        import uvicorn

        from .service import ServiceState, create_app
        from .store import AnnotationStore

        corpus = formats.load_corpus(corpus_path)
        inventories = _parse_lexicon_options(lexicons)
        store = AnnotationStore(data_dir, snapshot_every=256)
        if annotations_path and store.is_empty():
            count = store.import_annotations(formats.load_annotations(annotations_path))
            click.echo(f"seeded {count} annotations", err=True)
        state = ServiceState(
            corpus=corpus,
            inventories=inventories,
            store=store,
            lemma_lookup=_load_lemma_lookup(lookup_path),
            assignments=_load_assignments(assignments_path),
            mentions=formats.load_mentions(entities_path) if entities_path else (),
            ui_dir=Path(ui_dir) if ui_dir else None,
        )
        uvicorn.run(create_app(state), host=host, port=port, log_level="info")

    _guard(run)


# --- convert ---------------------------------------------------------------------

@main.command()
@click.option(
    "--direction",
    type=click.Choice(("to-tokens", "to-corpus")),
    required=True,
    help="to-tokens: corpus JSONL -> per-token TSV; to-corpus: the reverse",
)
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
def convert(direction, input_path, output_path) -> None:
    """Translate between the corpus format and the flat per-token export."""

    def run() -> None:
        if direction == "to-tokens":
            corpus = formats.load_corpus(input_path)
            formats.write_token_export(corpus, output_path)
        else:
            corpus = formats.read_token_export(input_path)
            formats.save_corpus(corpus, output_path)
        click.echo(f"wrote {output_path}")

    _guard(run)


if __name__ == "__main__":
    main()
