"""Heat-map artifacts: rank-based Gaussianization of sentence scores, a
Neat-Vision-compatible JSON payload, and a standalone HTML rendering."""

from __future__ import annotations

import html
import json
import math
from dataclasses import dataclass
from typing import Sequence

from .errors import EmptyInput

# Rational approximation of the standard normal inverse CDF
# (Wichura's PPND16 algorithm, double-precision coefficients).
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4, 5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15)


def _poly(coeffs: tuple[float, ...], x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def normal_quantile(p: float) -> float:
    """Inverse CDF of the standard normal for p in (0, 1)."""
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie strictly inside (0, 1)")
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly(_A, r) / _poly(_B, r)
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        value = _poly(_C, r) / _poly(_D, r)
    else:
        r -= 5.0
        value = _poly(_E, r) / _poly(_F, r)
    return -value if q < 0.0 else value


def _average_ranks(scores: Sequence[float]) -> list[float]:
    """Zero-based ranks; tied values share the mean of their positions."""
    n = len(scores)
    order = sorted(range(n), key=lambda i: scores[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and scores[order[j + 1]] == scores[order[i]]:
            j += 1
        avg = (i + j) / 2.0
        for t in range(i, j + 1):
            ranks[order[t]] = avg
        i = j + 1
    return ranks


def quantile_transform(scores: Sequence[float]) -> list[float]:
    """Map scores onto standard normal quantiles by rank.

    Quantiles are (rank + 0.5) / n with average ranks for ties, which keeps
    the endpoints finite and sends any constant input to all zeros.
    """
    if len(scores) == 0:
        raise EmptyInput("no scores to transform")
    n = len(scores)
    return [normal_quantile((rank + 0.5) / n) for rank in _average_ranks(scores)]


@dataclass(frozen=True)
class HeatmapDoc:
    note_id: str
    sentences: tuple[str, ...]
    raw_scores: tuple[float, ...]
    transformed: tuple[float, ...]
    display: tuple[float, ...]  # min-max of transformed, in [0, 1]


def make_heatmap_doc(note_id: str, sentences: Sequence[str],
                     raw_scores: Sequence[float]) -> HeatmapDoc:
    if len(sentences) != len(raw_scores):
        raise ValueError("sentences and scores must be parallel")
    transformed = quantile_transform(raw_scores)
    lo, hi = min(transformed), max(transformed)
    if hi > lo:
        display = [(t - lo) / (hi - lo) for t in transformed]
    else:
        display = [1.0] * len(transformed)  # single/constant: highlight everything
    return HeatmapDoc(note_id=note_id, sentences=tuple(sentences),
                      raw_scores=tuple(float(s) for s in raw_scores),
                      transformed=tuple(transformed), display=tuple(display))


def emit_neatvision_json(doc: HeatmapDoc) -> str:
    """Serialize for the heat-map viewer: sorted keys, floats at 6 decimals,
    byte-stable for identical inputs."""
    attention = ", ".join(f"{v:.6f}" for v in doc.display)
    text = ", ".join(json.dumps(s) for s in doc.sentences)
    return ('{"attention": [%s], "id": %s, "label": 0, "prediction": 0, '
            '"text": [%s]}') % (attention, json.dumps(doc.note_id), text)


_HTML_PAGE = """<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>{title}</title>
</head>
<body style="font-family: Georgia, serif; max-width: 52em; margin: 2em auto; line-height: 1.6;">
<h2 style="font-weight: normal;">{title}</h2>
{body}
</body>
</html>
"""

_HTML_SENTENCE = ('<p style="margin: 0.2em 0;"><span style="background-color: '
                  'rgba(255, 0, 0, {alpha:.4f}); padding: 0.1em 0.2em;">'
                  '{text}</span></p>')


def emit_html(doc: HeatmapDoc) -> str:
    """Self-contained HTML page; each sentence's background is a red ramp
    proportional to its display score (0 = unshaded, 1 = full shade)."""
    body = "\n".join(
        _HTML_SENTENCE.format(alpha=score, text=html.escape(sentence))
        for sentence, score in zip(doc.sentences, doc.display)
    )
    return _HTML_PAGE.format(title=html.escape(doc.note_id), body=body)
