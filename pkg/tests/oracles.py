"""Independent reference implementations used as test oracles.

Everything here is straight-line scalar Python (no numpy) so the vectorized
engine is checked against a genuinely separate computation path.
"""

from __future__ import annotations

import math


# --- linear algebra helpers -------------------------------------------------

def matmul_wt(x, w):
    """x: n x d_in rows, w: d_out x d_in rows -> n x d_out (x @ w^T)."""
    return [[sum(xi[t] * wj[t] for t in range(len(xi))) for wj in w] for xi in x]


def add_row(x, bias):
    return [[v + b for v, b in zip(row, bias)] for row in x]


def layer_norm_rows(x, gain, bias, eps):
    out = []
    for row in x:
        m = sum(row) / len(row)
        var = sum((v - m) ** 2 for v in row) / len(row)
        s = math.sqrt(var + eps)
        out.append([(v - m) / s * g + b for v, g, b in zip(row, gain, bias)])
    return out


def gelu_scalar(v):
    return 0.5 * v * (1.0 + math.tanh(0.7978845608028654 * (v + 0.044715 * v ** 3)))


def softmax_row(row):
    top = max(row)
    exp = [math.exp(v - top) for v in row]
    total = sum(exp)
    return [e / total for e in exp]


# --- attention and encoder --------------------------------------------------

def loop_attention(q, k, v):
    """Triple-nested-loop scaled dot-product attention. Returns (context, weights)."""
    n = len(q)
    d_k = len(q[0])
    scale = 1.0 / math.sqrt(d_k)
    weights = []
    for i in range(n):
        logits = [sum(q[i][t] * k[j][t] for t in range(d_k)) * scale for j in range(n)]
        weights.append(softmax_row(logits))
    d_v = len(v[0])
    context = [[sum(weights[i][j] * v[j][t] for j in range(n)) for t in range(d_v)]
               for i in range(n)]
    return context, weights


def scalar_encoder_forward(ids, segment_ids, tensors, config):
    """Straight-line reimplementation of the full forward pass.

    tensors maps the engine's tensor names to nested Python lists.
    Returns (hidden rows, attentions[layer][head]).
    """
    n = len(ids)
    eps = config.layer_norm_epsilon
    d_k = config.hidden_size // config.num_heads

    token = tensors["embeddings.token"]
    position = tensors["embeddings.position"]
    segment = tensors["embeddings.segment"]
    x = [[token[ids[i]][t] + position[i][t] + segment[segment_ids[i]][t]
          for t in range(config.hidden_size)] for i in range(n)]
    x = layer_norm_rows(x, tensors["embeddings.layernorm.gain"],
                        tensors["embeddings.layernorm.bias"], eps)

    attentions = []
    for layer in range(config.num_layers):
        p = f"layer.{layer}"
        q = add_row(matmul_wt(x, tensors[f"{p}.attn.q.weight"]), tensors[f"{p}.attn.q.bias"])
        k = add_row(matmul_wt(x, tensors[f"{p}.attn.k.weight"]), tensors[f"{p}.attn.k.bias"])
        v = add_row(matmul_wt(x, tensors[f"{p}.attn.v.weight"]), tensors[f"{p}.attn.v.bias"])

        contexts = []
        layer_weights = []
        for h in range(config.num_heads):
            lo, hi = h * d_k, (h + 1) * d_k
            ctx, wts = loop_attention([row[lo:hi] for row in q],
                                      [row[lo:hi] for row in k],
                                      [row[lo:hi] for row in v])
            contexts.append(ctx)
            layer_weights.append(wts)
        attentions.append(layer_weights)

        concat = [[val for ctx in contexts for val in ctx[i]] for i in range(n)]
        attn_out = add_row(matmul_wt(concat, tensors[f"{p}.attn.out.weight"]),
                           tensors[f"{p}.attn.out.bias"])
        x = layer_norm_rows([[a + b for a, b in zip(xi, oi)] for xi, oi in zip(x, attn_out)],
                            tensors[f"{p}.attn_layernorm.gain"],
                            tensors[f"{p}.attn_layernorm.bias"], eps)

        ffn = add_row(matmul_wt(x, tensors[f"{p}.ffn.in.weight"]), tensors[f"{p}.ffn.in.bias"])
        ffn = [[gelu_scalar(v) for v in row] for row in ffn]
        ffn = add_row(matmul_wt(ffn, tensors[f"{p}.ffn.out.weight"]), tensors[f"{p}.ffn.out.bias"])
        x = layer_norm_rows([[a + b for a, b in zip(xi, fi)] for xi, fi in zip(x, ffn)],
                            tensors[f"{p}.ffn_layernorm.gain"],
                            tensors[f"{p}.ffn_layernorm.bias"], eps)

    return x, attentions


def tensors_as_lists(tensors):
    return {name: arr.tolist() for name, arr in tensors.items()}


# --- selection and scoring ---------------------------------------------------

def loop_cls_score(weights):
    """Mean attention received by column 0 from rows 1..n-1."""
    n = len(weights)
    return sum(weights[i][0] for i in range(1, n)) / (n - 1)


def brute_select(scores):
    """The above-mean rule, written flat: {i : s_i > mean}, or everything."""
    mean = sum(scores) / len(scores)
    selected = [i for i, s in enumerate(scores) if s > mean]
    return selected if selected else list(range(len(scores)))


# --- divergences --------------------------------------------------------------

def loop_kld(p, q):
    total = 0.0
    for pi, qi in zip(p, q):
        if pi > 0.0:
            total += pi * math.log2(pi / qi)
    return total


def loop_jsd(p, q):
    m = [(pi + qi) / 2.0 for pi, qi in zip(p, q)]
    return 0.5 * loop_kld(p, m) + 0.5 * loop_kld(q, m)


def loop_smoothed(words, universe, alpha):
    counts = {u: 0 for u in universe}
    total = 0
    for w in words:
        if w in counts:
            counts[w] += 1
            total += 1
    denom = total + alpha * len(universe)
    return [(counts[u] + alpha) / denom for u in universe]


# --- baselines -----------------------------------------------------------------

def sumbasic_select(sentence_words, k):
    """Independent SumBasic: word probabilities, mean-weight argmax with
    lowest-index ties, square probabilities of chosen words. Returns the
    selected indices in document order."""
    counts = {}
    total = 0
    for words in sentence_words:
        for w in words:
            counts[w] = counts.get(w, 0) + 1
            total += 1
    prob = {w: c / total for w, c in counts.items()}

    picked = []
    candidates = list(range(len(sentence_words)))
    for _ in range(min(k, len(sentence_words))):
        best = None
        best_weight = -1.0
        for i in candidates:
            words = sentence_words[i]
            weight = (sum(prob[w] for w in words) / len(words)) if words else 0.0
            if weight > best_weight:
                best, best_weight = i, weight
        picked.append(best)
        candidates.remove(best)
        for w in set(sentence_words[best]):
            prob[w] = prob[w] * prob[w]
    return sorted(picked)


def tfidf_cosine_matrix(sentence_words):
    """Same tf-idf recipe as the engine, recomputed with plain loops."""
    n = len(sentence_words)
    vocab = sorted({w for words in sentence_words for w in words})
    df = {w: sum(1 for words in sentence_words if w in words) for w in vocab}
    idf = {w: math.log(n / (1.0 + df[w])) + 1.0 for w in vocab}
    vectors = []
    for words in sentence_words:
        tf = {}
        for w in words:
            tf[w] = tf.get(w, 0) + 1
        vectors.append([tf.get(w, 0) * idf[w] for w in vocab])

    def norm(v):
        return math.sqrt(sum(x * x for x in v))

    sim = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            ni, nj = norm(vectors[i]), norm(vectors[j])
            if ni > 0.0 and nj > 0.0:
                dot = sum(a * b for a, b in zip(vectors[i], vectors[j]))
                sim[i][j] = min(max(dot / (ni * nj), 0.0), 1.0)
    return sim


def power_pagerank(sim, damping=0.85, tol=1e-6, max_iter=200):
    """Dense power iteration over the weighted graph, dangling rows uniform."""
    n = len(sim)
    out = [sum(row) for row in sim]
    rank = [1.0 / n] * n
    for _ in range(max_iter):
        dangling = sum(rank[i] for i in range(n) if out[i] == 0.0)
        new = []
        for j in range(n):
            inflow = sum(rank[i] * sim[i][j] / out[i] for i in range(n) if out[i] > 0.0)
            new.append((1.0 - damping) / n + damping * (inflow + dangling / n))
        change = sum(abs(a - b) for a, b in zip(new, rank))
        rank = new
        if change < tol:
            break
    return rank


def pagerank_select(sentence_words, k):
    rank = power_pagerank(tfidf_cosine_matrix(sentence_words))
    order = sorted(range(len(rank)), key=lambda i: (-rank[i], i))
    return sorted(order[:min(k, len(rank))])


def nearest_to_mean(embeddings):
    """Brute-force scan for the row closest to the global mean."""
    dim = len(embeddings[0])
    mean = [sum(row[t] for row in embeddings) / len(embeddings) for t in range(dim)]
    best, best_d = 0, float("inf")
    for i, row in enumerate(embeddings):
        d = sum((a - b) ** 2 for a, b in zip(row, mean))
        if d < best_d:
            best, best_d = i, d
    return best
