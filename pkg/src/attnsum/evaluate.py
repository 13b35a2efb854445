"""Word distributions and divergence scoring of summaries against originals.

A summary is considered faithful when the word distribution of its sentences
stays close to the distribution of the whole note; closeness is measured with
base-2 KL and Jensen-Shannon divergences over the note's own vocabulary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .baselines import Budget, centroid_summarize, frequency_summarize, graph_summarize
from .corpus import Document, Vocabulary
from .errors import EmptySummary, EmptyUniverse, UniverseMismatch
from .summarizer import (
    METHOD_ATTENTION,
    METHOD_CENTROID,
    METHOD_FREQUENCY,
    METHOD_GRAPH,
    Summary,
    summarize,
)
from .weights import WeightStore

DEFAULT_ALPHA = 0.5


@dataclass(frozen=True)
class WordDistribution:
    universe: tuple[str, ...]
    probs: tuple[float, ...]
    dropped: int = field(default=0, compare=False)  # words outside the universe

    def __post_init__(self):
        if len(self.universe) != len(self.probs):
            raise ValueError("universe and probs must be parallel")
        if len(set(self.universe)) != len(self.universe):
            raise ValueError("universe has duplicate words")
        if any(p < 0.0 for p in self.probs):
            raise ValueError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")


def word_distribution(words: Iterable[str], universe: Sequence[str],
                      alpha: float = DEFAULT_ALPHA) -> WordDistribution:
    """Additively smoothed distribution of words over a fixed universe.

    prob(w) = (count(w) + alpha) / (total + alpha * |universe|); words not in
    the universe are dropped and reported via the `dropped` tally.
    """
    if len(universe) == 0:
        raise EmptyUniverse("universe must be nonempty")
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    index = {w: i for i, w in enumerate(universe)}
    counts = [0] * len(universe)
    dropped = 0
    total = 0
    for w in words:
        i = index.get(w)
        if i is None:
            dropped += 1
        else:
            counts[i] += 1
            total += 1
    denom = total + alpha * len(universe)
    probs = tuple((c + alpha) / denom for c in counts)
    return WordDistribution(universe=tuple(universe), probs=probs, dropped=dropped)


def _check_universes(p: WordDistribution, q: WordDistribution) -> None:
    if p.universe != q.universe:
        raise UniverseMismatch("distributions are over different universes")


def kld(p: WordDistribution, q: WordDistribution) -> float:
    """Kullback-Leibler divergence in bits; terms with p(x)=0 contribute 0.
    Requires every q(x) > 0."""
    _check_universes(p, q)
    total = 0.0
    for pi, qi in zip(p.probs, q.probs):
        if pi > 0.0:
            if qi <= 0.0:
                raise ValueError("kld undefined: q has a zero where p does not")
            total += pi * math.log2(pi / qi)
    return total


def jsd(p: WordDistribution, q: WordDistribution) -> float:
    """Jensen-Shannon divergence in bits; symmetric and bounded by 1."""
    _check_universes(p, q)
    m = WordDistribution(
        universe=p.universe,
        probs=tuple((pi + qi) / 2.0 for pi, qi in zip(p.probs, q.probs)),
    )
    return 0.5 * kld(p, m) + 0.5 * kld(q, m)


def evaluate(doc: Document, summary: Summary,
             alpha: float = DEFAULT_ALPHA) -> tuple[float, float]:
    """Divergence of the summary's word distribution from the whole note's.

    Both distributions live on the note's vocabulary and are smoothed, so the
    divergences are always finite.
    """
    if not summary.selected:
        raise EmptySummary(f"note {doc.note_id}: summary selects no sentences")
    if any(i < 0 or i >= len(doc.sentences) for i in summary.selected):
        raise ValueError("summary indices outside the document")
    universe = doc.vocabulary
    doc_words = [w for s in doc.sentences for w in s.words]
    summary_words = [w for i in summary.selected for w in doc.sentences[i].words]
    p = word_distribution(doc_words, universe, alpha)
    q = word_distribution(summary_words, universe, alpha)
    return kld(p, q), jsd(p, q)


@dataclass(frozen=True)
class ReportRow:
    note_id: str
    method: str
    kld: float
    jsd: float
    summary_len: int
    error: str | None = None


@dataclass(frozen=True)
class DivergenceReport:
    rows: tuple[ReportRow, ...]
    means: dict[str, dict[str, float]]  # method -> {"mean_kld", "mean_jsd"}

    def series(self) -> dict[str, dict[str, list]]:
        """Per-method, note-ordered value series for line charts."""
        out: dict[str, dict[str, list]] = {}
        for row in self.rows:
            if row.error is not None:
                continue
            entry = out.setdefault(row.method, {"note_ids": [], "kld": [], "jsd": []})
            entry["note_ids"].append(row.note_id)
            entry["kld"].append(row.kld)
            entry["jsd"].append(row.jsd)
        return out


def report_means(rows: Sequence[ReportRow]) -> dict[str, dict[str, float]]:
    by_method: dict[str, list[ReportRow]] = {}
    for row in rows:
        if row.error is None:
            by_method.setdefault(row.method, []).append(row)
    return {
        method: {
            "mean_kld": sum(r.kld for r in group) / len(group),
            "mean_jsd": sum(r.jsd for r in group) / len(group),
        }
        for method, group in by_method.items()
    }


def run_method(method: str, doc: Document, w: WeightStore, vocab: Vocabulary,
               budget: Budget, seed: int | None = None) -> Summary:
    if method == METHOD_ATTENTION:
        return summarize(doc, w, vocab)
    if method == METHOD_FREQUENCY:
        return frequency_summarize(doc, budget)
    if method == METHOD_GRAPH:
        return graph_summarize(doc, budget)
    if method == METHOD_CENTROID:
        if seed is None:
            return centroid_summarize(doc, budget, w, vocab)
        return centroid_summarize(doc, budget, w, vocab, seed=seed)
    raise ValueError(f"unknown method {method!r}")


def _note_rows(doc: Document, methods: Sequence[str], w: WeightStore,
               vocab: Vocabulary, alpha: float, fixed_budget: Budget | None,
               ratio: float | None, seed: int | None) -> list[ReportRow]:
    rows: list[ReportRow] = []
    attention_summary: Summary | None = None
    try:
        attention_summary = summarize(doc, w, vocab)
    except Exception as exc:  # noqa: BLE001
        if METHOD_ATTENTION in methods:
            rows.append(ReportRow(doc.note_id, METHOD_ATTENTION,
                                  math.nan, math.nan, 0, error=str(exc)))

    if fixed_budget is not None:
        budget = fixed_budget
    elif ratio is not None:
        budget = Budget(k=max(1, math.ceil(ratio * len(doc.sentences))))
    elif attention_summary is not None:
        budget = Budget(k=len(attention_summary.selected))
    else:
        budget = Budget(k=max(1, math.ceil(0.3 * len(doc.sentences))))

    for method in methods:
        try:
            if method == METHOD_ATTENTION:
                if attention_summary is None:
                    continue  # failure row already recorded
                summary = attention_summary
            else:
                summary = run_method(method, doc, w, vocab, budget, seed=seed)
            k, j = evaluate(doc, summary, alpha)
            rows.append(ReportRow(doc.note_id, method, k, j,
                                  len(summary.selected)))
        except Exception as exc:  # noqa: BLE001
            rows.append(ReportRow(doc.note_id, method,
                                  math.nan, math.nan, 0, error=str(exc)))
    return rows


def compare(docs: Sequence[Document], methods: Sequence[str], w: WeightStore,
            vocab: Vocabulary, alpha: float = DEFAULT_ALPHA,
            fixed_budget: Budget | None = None, ratio: float | None = None,
            seed: int | None = None, threads: int = 1) -> DivergenceReport:
    """Run every requested method on every note and score the summaries.

    Baseline budgets are length-matched to the note's attention summary
    unless a fixed budget or a ratio is given. Failures are recorded as
    error rows; the run continues. Notes may be processed in parallel but
    the report keeps corpus order.
    """
    def work(doc: Document) -> list[ReportRow]:
        return _note_rows(doc, methods, w, vocab, alpha, fixed_budget, ratio, seed)

    if threads > 1 and len(docs) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_note = list(pool.map(work, docs))
    else:
        per_note = [work(doc) for doc in docs]
    rows = [row for rows in per_note for row in rows]
    return DivergenceReport(rows=tuple(rows), means=report_means(rows))
