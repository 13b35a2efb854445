"""Attention-based extractive summarization of clinical notes."""

from .baselines import (
    Budget,
    SimilarityGraph,
    centroid_summarize,
    frequency_summarize,
    graph_summarize,
    kmeans,
    pagerank,
    similarity_graph,
)
from .corpus import (
    Document,
    RawNote,
    Sentence,
    TokenSequence,
    Vocabulary,
    build_document,
    clean_words,
    load_corpus,
    segment_sentences,
    wordpiece_tokenize,
)
from .encoder import EncoderOutput, attention_head, embed, encoder_forward
from .evaluate import (
    DivergenceReport,
    WordDistribution,
    compare,
    evaluate,
    jsd,
    kld,
    word_distribution,
)
from .summarizer import (
    METHODS,
    SentenceScore,
    Summary,
    score_sentence,
    select_sentences,
    summarize,
    summary_to_dict,
    summary_to_json,
)
from .viz import HeatmapDoc, emit_html, emit_neatvision_json, make_heatmap_doc, quantile_transform
from .weights import EncoderConfig, WeightStore, load_weights, save_weights

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "SimilarityGraph",
    "centroid_summarize",
    "frequency_summarize",
    "graph_summarize",
    "kmeans",
    "pagerank",
    "similarity_graph",
    "Document",
    "RawNote",
    "Sentence",
    "TokenSequence",
    "Vocabulary",
    "build_document",
    "clean_words",
    "load_corpus",
    "segment_sentences",
    "wordpiece_tokenize",
    "EncoderOutput",
    "attention_head",
    "embed",
    "encoder_forward",
    "DivergenceReport",
    "WordDistribution",
    "compare",
    "evaluate",
    "jsd",
    "kld",
    "word_distribution",
    "METHODS",
    "SentenceScore",
    "Summary",
    "score_sentence",
    "select_sentences",
    "summarize",
    "summary_to_dict",
    "summary_to_json",
    "HeatmapDoc",
    "emit_html",
    "emit_neatvision_json",
    "make_heatmap_doc",
    "quantile_transform",
    "EncoderConfig",
    "WeightStore",
    "load_weights",
    "save_weights",
]
