"""Attention-based sentence scoring and above-mean selection."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import MAX_SEQUENCE_LENGTH, Document, Vocabulary, wordpiece_tokenize
from .encoder import EncoderOutput, encoder_forward
from .errors import EmptyInput, TooShort
from .weights import WeightStore

METHOD_ATTENTION = "attention"
METHOD_FREQUENCY = "frequency"
METHOD_GRAPH = "graph"
METHOD_CENTROID = "centroid"
METHODS = (METHOD_ATTENTION, METHOD_FREQUENCY, METHOD_GRAPH, METHOD_CENTROID)


@dataclass(frozen=True)
class SentenceScore:
    sentence_index: int
    score: float


@dataclass(frozen=True)
class Summary:
    note_id: str
    method: str
    selected: tuple[int, ...]       # strictly increasing sentence indices
    scores: tuple[float, ...]       # one score per sentence, all sentences
    threshold: float                # mean score; informational for baselines
    warnings: tuple[str, ...] = field(default=(), compare=False)


def score_sentence(out: EncoderOutput) -> float:
    """Significance of one sentence: mean attention paid to the classifier
    token by every other query position, in head 0 of the last layer."""
    weights = out.attentions[-1][0]
    n = weights.shape[0]
    if n < 2:
        raise TooShort("need at least the two special tokens")
    return float(weights[1:, 0].mean(dtype=np.float64))


def select_sentences(scores: Sequence[float], note_id: str = "",
                     method: str = METHOD_ATTENTION,
                     warnings: Sequence[str] = ()) -> Summary:
    """Keep sentences scoring strictly above the mean score.

    When no score exceeds the mean (all scores effectively equal) every
    sentence is kept, so the summary is never empty.
    """
    if len(scores) == 0:
        raise EmptyInput("no sentence scores")
    scores = [float(s) for s in scores]
    mean = sum(scores) / len(scores)
    selected = [i for i, s in enumerate(scores) if s > mean]
    if not selected:
        selected = list(range(len(scores)))
    return Summary(note_id=note_id, method=method, selected=tuple(selected),
                   scores=tuple(scores), threshold=mean, warnings=tuple(warnings))


def summarize(doc: Document, w: WeightStore, vocab: Vocabulary) -> Summary:
    """Tokenize each sentence, run the encoder, score, select above mean.

    A sentence that is empty after cleaning or fails to encode gets score 0
    and a warning instead of aborting the note.
    """
    max_length = min(MAX_SEQUENCE_LENGTH, w.config.max_positions)
    scores: list[float] = []
    warnings: list[str] = []
    for sentence in doc.sentences:
        if not sentence.words:
            scores.append(0.0)
            warnings.append(f"sentence {sentence.index}: empty after cleaning")
            continue
        try:
            seq = wordpiece_tokenize(sentence, vocab, max_length=max_length)
            scores.append(score_sentence(encoder_forward(seq, w)))
        except Exception as exc:  # noqa: BLE001 - robustness on noisy notes
            scores.append(0.0)
            warnings.append(f"sentence {sentence.index}: {exc}")
    return select_sentences(scores, note_id=doc.note_id,
                            method=METHOD_ATTENTION, warnings=warnings)


def summary_to_dict(summary: Summary, doc: Document) -> dict:
    return {
        "note_id": summary.note_id,
        "method": summary.method,
        "threshold": summary.threshold,
        "selected": list(summary.selected),
        "scores": list(summary.scores),
        "sentences": [doc.sentences[i].raw for i in summary.selected],
    }


def summary_to_json(summary: Summary, doc: Document) -> str:
    return json.dumps(summary_to_dict(summary, doc), sort_keys=True)
