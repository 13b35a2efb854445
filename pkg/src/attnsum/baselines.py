"""Comparison summarizers: word-frequency, similarity-graph rank, centroid
clustering over encoder sentence embeddings.

All three take an explicit sentence budget and are deterministic given the
same document, budget and weights.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import MAX_SEQUENCE_LENGTH, Document, Vocabulary, wordpiece_tokenize
from .encoder import encoder_forward
from .errors import NoContent
from .summarizer import METHOD_CENTROID, METHOD_FREQUENCY, METHOD_GRAPH, Summary
from .weights import WeightStore

PAGERANK_DAMPING = 0.85
PAGERANK_TOL = 1e-6
PAGERANK_MAX_ITER = 200
KMEANS_SEED = 0x5EED
KMEANS_MAX_ITER = 100
KMEANS_TOL = 1e-4


@dataclass(frozen=True)
class Budget:
    """Sentence budget; the effective budget never exceeds the sentence count."""
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("budget must be >= 1")

    def effective(self, sentence_count: int) -> int:
        return min(self.k, sentence_count)


@dataclass(frozen=True)
class SimilarityGraph:
    """Symmetric nonnegative sentence-similarity matrix with zero diagonal."""
    weights: np.ndarray

    def __post_init__(self):
        w = self.weights
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError("similarity matrix must be square")
        if np.abs(w - w.T).max(initial=0.0) > 1e-9:
            raise ValueError("similarity matrix must be symmetric")
        if np.any(np.diagonal(w) != 0.0):
            raise ValueError("diagonal must be zero")
        if w.size and (w.min() < 0.0 or w.max() > 1.0):
            raise ValueError("entries must lie in [0, 1]")

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def _require_content(doc: Document) -> None:
    if not any(s.words for s in doc.sentences):
        raise NoContent(f"note {doc.note_id}: no sentence survives cleaning")


def frequency_summarize(doc: Document, budget: Budget) -> Summary:
    """Iterative word-probability selection.

    Sentence weight is the mean probability of its words; after each pick the
    chosen sentence's word probabilities are squared so repeated vocabulary
    stops dominating. Ties go to the lower sentence index.
    """
    _require_content(doc)
    total = sum(doc.word_counts.values())
    prob = {w: c / total for w, c in doc.word_counts.items()}
    k = budget.effective(len(doc.sentences))

    initial_weights = [
        sum(prob[w] for w in s.words) / len(s.words) if s.words else 0.0
        for s in doc.sentences
    ]

    chosen: list[int] = []
    remaining = set(range(len(doc.sentences)))
    for _ in range(k):
        best, best_weight = None, -1.0
        for i in sorted(remaining):
            words = doc.sentences[i].words
            weight = sum(prob[w] for w in words) / len(words) if words else 0.0
            if weight > best_weight:
                best, best_weight = i, weight
        chosen.append(best)
        remaining.discard(best)
        for w in set(doc.sentences[best].words):
            prob[w] = prob[w] ** 2

    return Summary(note_id=doc.note_id, method=METHOD_FREQUENCY,
                   selected=tuple(sorted(chosen)),
                   scores=tuple(initial_weights), threshold=0.0)


def _tfidf_vectors(doc: Document) -> np.ndarray:
    """Rows are sentences; tf is the raw in-sentence count,
    idf = ln(n / (1 + df)) + 1 over the document's sentences."""
    vocab = doc.vocabulary
    col = {w: j for j, w in enumerate(vocab)}
    n = len(doc.sentences)
    df = np.zeros(len(vocab))
    for s in doc.sentences:
        for w in set(s.words):
            df[col[w]] += 1
    idf = np.log(n / (1.0 + df)) + 1.0
    tf = np.zeros((n, len(vocab)))
    for i, s in enumerate(doc.sentences):
        for w in s.words:
            tf[i, col[w]] += 1.0
    return tf * idf


def similarity_graph(doc: Document) -> SimilarityGraph:
    """Complete weighted graph of pairwise cosine similarities."""
    vectors = _tfidf_vectors(doc)
    norms = np.linalg.norm(vectors, axis=1)
    safe = np.where(norms > 0.0, norms, 1.0)
    unit = vectors / safe[:, None]
    sim = unit @ unit.T
    np.fill_diagonal(sim, 0.0)
    return SimilarityGraph(weights=np.clip(sim, 0.0, 1.0))


def pagerank(graph: SimilarityGraph, damping: float = PAGERANK_DAMPING,
             tol: float = PAGERANK_TOL, max_iter: int = PAGERANK_MAX_ITER
             ) -> np.ndarray:
    """Power iteration with uniform teleport; rows with no outgoing weight
    redistribute uniformly. Stops when the L1 change drops below tol."""
    w = graph.weights
    n = graph.n
    out = w.sum(axis=1)
    rank = np.full(n, 1.0 / n)
    teleport = (1.0 - damping) / n
    for _ in range(max_iter):
        dangling = rank[out == 0.0].sum()
        flow = (rank / np.where(out > 0.0, out, 1.0)) * (out > 0.0)
        new = teleport + damping * (flow @ w + dangling / n)
        if np.abs(new - rank).sum() < tol:
            rank = new
            break
        rank = new
    return rank


def _top_k_indices(values: np.ndarray, k: int) -> list[int]:
    # highest value first, lower index breaking ties
    order = sorted(range(len(values)), key=lambda i: (-values[i], i))
    return sorted(order[:k])


def graph_summarize(doc: Document, budget: Budget) -> Summary:
    """Rank sentences by stationary weight on the cosine-similarity graph."""
    _require_content(doc)
    graph = similarity_graph(doc)
    ranks = pagerank(graph)
    k = budget.effective(len(doc.sentences))
    return Summary(note_id=doc.note_id, method=METHOD_GRAPH,
                   selected=tuple(_top_k_indices(ranks, k)),
                   scores=tuple(float(r) for r in ranks), threshold=0.0)


@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    objective_history: tuple[float, ...]  # non-increasing across iterations


def kmeans(points: np.ndarray, k: int, seed: int = KMEANS_SEED,
           max_iter: int = KMEANS_MAX_ITER, tol: float = KMEANS_TOL
           ) -> KMeansResult:
    """Lloyd iterations with k-means++ seeding and Euclidean distances.

    Fully deterministic for a fixed seed. Assignment ties and the ++ seeding
    fallback (all candidate distances zero) resolve to the lowest index; a
    cluster that loses all points keeps its previous centroid.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    rng = np.random.default_rng(seed)

    seed_indices = [int(rng.integers(n))]
    for _ in range(1, k):
        d2 = np.min(
            [((points - points[j]) ** 2).sum(axis=1) for j in seed_indices], axis=0)
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # every point coincides with a seed; take the lowest unused index
            idx = next(i for i in range(n) if i not in seed_indices)
        seed_indices.append(idx)
    centroids = points[seed_indices].copy()

    history: list[float] = []
    labels = np.zeros(n, dtype=np.int64)
    for _ in range(max_iter):
        d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        labels = d2.argmin(axis=1)
        history.append(float(d2[np.arange(n), labels].sum()))
        new_centroids = centroids.copy()
        for j in range(k):
            members = points[labels == j]
            if len(members):
                new_centroids[j] = members.mean(axis=0)
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if shift < tol:
            break
    d2 = ((points[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    history.append(float(d2[np.arange(n), labels].sum()))
    return KMeansResult(labels=labels, centroids=centroids,
                        objective_history=tuple(history))


def sentence_embeddings(doc: Document, w: WeightStore,
                        vocab: Vocabulary) -> np.ndarray:
    """Classifier-position hidden state of the last layer, one row per sentence."""
    max_length = min(MAX_SEQUENCE_LENGTH, w.config.max_positions)
    rows = []
    for sentence in doc.sentences:
        seq = wordpiece_tokenize(sentence, vocab, max_length=max_length)
        rows.append(encoder_forward(seq, w).hidden[0])
    return np.array(rows, dtype=np.float64)


def centroid_summarize(doc: Document, budget: Budget, w: WeightStore,
                       vocab: Vocabulary, seed: int = KMEANS_SEED) -> Summary:
    """Cluster sentence embeddings and keep the sentence nearest each centroid."""
    _require_content(doc)
    embeddings = sentence_embeddings(doc, w, vocab)
    k = budget.effective(len(doc.sentences))
    result = kmeans(embeddings, k, seed=seed)

    dist = np.sqrt(((embeddings - result.centroids[result.labels]) ** 2).sum(axis=1))
    chosen: list[int] = []
    for j in range(k):
        members = np.flatnonzero(result.labels == j)
        if len(members) == 0:
            continue
        best = min(members, key=lambda i: (dist[i], i))
        chosen.append(int(best))
    # duplicate embeddings can starve a cluster; fill deterministically
    for i in range(len(doc.sentences)):
        if len(chosen) >= k:
            break
        if i not in chosen:
            chosen.append(i)

    return Summary(note_id=doc.note_id, method=METHOD_CENTROID,
                   selected=tuple(sorted(chosen)),
                   scores=tuple(float(-d) for d in dist), threshold=0.0)
