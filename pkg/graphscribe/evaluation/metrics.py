"""
Evaluation Metrics

Corpus metrics for generated sentences (BLEU-4, ROUGE-L, chrF++, CIDEr-D)
and order metrics for predicted triplet orders. All text metrics take one
hypothesis string and one or more reference strings per example, tokenize
with the package tokenizer and report on a 0-100 scale (CIDEr-D on its
own 0-10 scale).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.stats import kendalltau

from graphscribe.data.tokenizer import tokenize
from graphscribe.data.types import OrderLabel

References = Sequence[Union[str, Sequence[str]]]

BLEU_ORDER = 4
CHRF_CHAR_ORDER = 6
CHRF_WORD_ORDER = 2
CHRF_BETA = 2.0
ROUGE_BETA = 1.2
CIDER_ORDER = 4
CIDER_SIGMA = 6.0

SIZE_BUCKETS = ("1-3", "4-6", "7+")


def _ref_lists(references: References) -> List[List[str]]:
    return [[r] if isinstance(r, str) else list(r) for r in references]


def _check(hypotheses: Sequence[str], references: References) -> List[List[str]]:
    refs = _ref_lists(references)
    if len(hypotheses) != len(refs):
        raise ValueError(f"Got {len(hypotheses)} hypotheses for {len(refs)} reference sets")
    if any(not r for r in refs):
        raise ValueError("Every example needs at least one reference")
    return refs


def ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


# BLEU


@dataclass
class BleuStats:
    """Sufficient statistics for corpus BLEU; adding two is the corpus merge."""
    matches: List[int] = field(default_factory=lambda: [0] * BLEU_ORDER)
    totals: List[int] = field(default_factory=lambda: [0] * BLEU_ORDER)
    hyp_len: int = 0
    ref_len: int = 0

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            matches=[a + b for a, b in zip(self.matches, other.matches)],
            totals=[a + b for a, b in zip(self.totals, other.totals)],
            hyp_len=self.hyp_len + other.hyp_len,
            ref_len=self.ref_len + other.ref_len,
        )

    def score(self, smooth: bool = False) -> float:
        if self.hyp_len == 0:
            return 0.0
        log_precision = 0.0
        for n, (match, total) in enumerate(zip(self.matches, self.totals), start=1):
            if smooth and n >= 2:
                match, total = match + 1, total + 1
            if match == 0 or total == 0:
                return 0.0
            log_precision += math.log(match / total)
        if self.hyp_len < self.ref_len:
            brevity = math.exp(1.0 - self.ref_len / self.hyp_len)
        else:
            brevity = 1.0
        return 100.0 * brevity * math.exp(log_precision / BLEU_ORDER)


def bleu_stats(hypothesis: str, references: Sequence[str]) -> BleuStats:
    hyp = tokenize(hypothesis)
    refs = [tokenize(r) for r in references]

    # closest reference length, shorter on ties
    ref_len = min((abs(len(r) - len(hyp)), len(r)) for r in refs)[1]
    stats = BleuStats(hyp_len=len(hyp), ref_len=ref_len)
    for n in range(1, BLEU_ORDER + 1):
        hyp_counts = ngrams(hyp, n)
        max_ref = Counter()
        for r in refs:
            for gram, count in ngrams(r, n).items():
                max_ref[gram] = max(max_ref[gram], count)
        stats.matches[n - 1] = sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
        stats.totals[n - 1] = max(0, len(hyp) - n + 1)
    return stats


def bleu4(hypotheses: Sequence[str], references: References) -> float:
    """Corpus BLEU-4 without smoothing, x100."""
    refs = _check(hypotheses, references)
    total = BleuStats()
    for hyp, ref in zip(hypotheses, refs):
        total = total + bleu_stats(hyp, ref)
    return total.score()


def sentence_bleu(hypothesis: str, references: Union[str, Sequence[str]]) -> float:
    """Sentence BLEU-4 with add-one smoothing on orders 2 to 4, x100."""
    refs = [references] if isinstance(references, str) else list(references)
    return bleu_stats(hypothesis, refs).score(smooth=True)


# ROUGE-L


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    table = np.zeros((len(a) + 1, len(b) + 1), dtype=np.int64)
    for i, x in enumerate(a, start=1):
        for j, y in enumerate(b, start=1):
            table[i, j] = table[i - 1, j - 1] + 1 if x == y else max(table[i - 1, j], table[i, j - 1])
    return int(table[-1, -1])


def sentence_rouge_l(hypothesis: str, references: Sequence[str], beta: float = ROUGE_BETA) -> float:
    hyp = tokenize(hypothesis)
    precisions, recalls = [], []
    for ref in references:
        ref_tokens = tokenize(ref)
        lcs = lcs_length(hyp, ref_tokens)
        precisions.append(lcs / len(hyp) if hyp else 0.0)
        recalls.append(lcs / len(ref_tokens) if ref_tokens else 0.0)
    p, r = max(precisions), max(recalls)
    if p == 0.0 or r == 0.0:
        return 0.0
    return ((1 + beta ** 2) * p * r) / (r + beta ** 2 * p)


def rouge_l(hypotheses: Sequence[str], references: References) -> float:
    """LCS F-measure (beta = 1.2) averaged over the corpus, x100."""
    refs = _check(hypotheses, references)
    if not refs:
        return 0.0
    return 100.0 * float(np.mean([sentence_rouge_l(h, r) for h, r in zip(hypotheses, refs)]))


# chrF++


def _chrf_statistics(hypothesis: str, reference: str) -> List[Tuple[int, int, int]]:
    """(hypothesis n-grams, reference n-grams, common n-grams) per order."""
    stats = []
    hyp_chars = "".join(hypothesis.split())
    ref_chars = "".join(reference.split())
    for n in range(1, CHRF_CHAR_ORDER + 1):
        h = Counter(hyp_chars[i:i + n] for i in range(len(hyp_chars) - n + 1))
        r = Counter(ref_chars[i:i + n] for i in range(len(ref_chars) - n + 1))
        stats.append((sum(h.values()), sum(r.values()), sum((h & r).values())))
    hyp_words, ref_words = tokenize(hypothesis), tokenize(reference)
    for n in range(1, CHRF_WORD_ORDER + 1):
        h, r = ngrams(hyp_words, n), ngrams(ref_words, n)
        stats.append((sum(h.values()), sum(r.values()), sum((h & r).values())))
    return stats


def _chrf_from_statistics(stats: Sequence[Tuple[int, int, int]], beta: float = CHRF_BETA) -> float:
    precision = recall = 0.0
    effective = 0
    for hyp_count, ref_count, common in stats:
        if hyp_count > 0 and ref_count > 0:
            precision += common / hyp_count
            recall += common / ref_count
            effective += 1
    if effective == 0:
        return 0.0
    precision /= effective
    recall /= effective
    if precision + recall == 0:
        return 0.0
    return (1 + beta ** 2) * precision * recall / (beta ** 2 * precision + recall)


def sentence_chrf_pp(hypothesis: str, references: Sequence[str]) -> float:
    text = " ".join(tokenize(hypothesis))
    return max(_chrf_from_statistics(_chrf_statistics(text, " ".join(tokenize(r)))) for r in references)


def chrf_pp(hypotheses: Sequence[str], references: References) -> float:
    """chrF++ (character 1-6 and word 1-2 grams, beta = 2) averaged over the corpus, x100."""
    refs = _check(hypotheses, references)
    if not refs:
        return 0.0
    return 100.0 * float(np.mean([sentence_chrf_pp(h, r) for h, r in zip(hypotheses, refs)]))


# CIDEr-D


def _cider_vector(counts: Counter, document_frequency: Counter, log_n_docs: float):
    vector: Dict[tuple, float] = {}
    norm = 0.0
    for gram, tf in counts.items():
        df = max(1.0, float(document_frequency[gram]))
        weight = float(tf) * (log_n_docs - math.log(df))
        vector[gram] = weight
        norm += weight ** 2
    return vector, math.sqrt(norm)


def _cider_similarity(hyp_vec, ref_vec, hyp_norm, ref_norm, hyp_len, ref_len, sigma) -> float:
    delta = float(hyp_len - ref_len)
    value = 0.0
    for gram, weight in hyp_vec.items():
        if gram in ref_vec:
            value += min(weight, ref_vec[gram]) * ref_vec[gram]
    if hyp_norm != 0 and ref_norm != 0:
        value /= hyp_norm * ref_norm
    else:
        value = 0.0
    return value * math.exp(-(delta ** 2) / (2 * sigma ** 2))


def cider_scores(hypotheses: Sequence[str], references: References, sigma: float = CIDER_SIGMA) -> List[float]:
    """
    Per-example CIDEr-D. Document frequencies come from the reference sets;
    with a single example every n-gram has zero idf and every score is 0.
    """
    refs = _check(hypotheses, references)
    hyp_tokens = [tokenize(h) for h in hypotheses]
    ref_tokens = [[tokenize(r) for r in rs] for rs in refs]

    document_frequency = Counter()
    for rs in ref_tokens:
        seen = set()
        for r in rs:
            for n in range(1, CIDER_ORDER + 1):
                seen.update(ngrams(r, n))
        document_frequency.update(seen)
    log_n_docs = math.log(float(len(refs))) if refs else 0.0

    scores = []
    for hyp, rs in zip(hyp_tokens, ref_tokens):
        per_order = np.zeros(CIDER_ORDER)
        for n in range(1, CIDER_ORDER + 1):
            hyp_vec, hyp_norm = _cider_vector(ngrams(hyp, n), document_frequency, log_n_docs)
            for r in rs:
                ref_vec, ref_norm = _cider_vector(ngrams(r, n), document_frequency, log_n_docs)
                per_order[n - 1] += _cider_similarity(hyp_vec, ref_vec, hyp_norm, ref_norm, len(hyp), len(r), sigma)
        scores.append(float(np.mean(per_order)) / len(rs) * 10.0)
    return scores


def cider(hypotheses: Sequence[str], references: References, sigma: float = CIDER_SIGMA) -> float:
    """Corpus CIDEr-D: mean of the per-example scores."""
    scores = cider_scores(hypotheses, references, sigma)
    return float(np.mean(scores)) if scores else 0.0


# Orders


@dataclass
class OrderMetrics:
    exact_match: float
    kendall_tau: float
    count: int

    def to_dict(self) -> Dict[str, float]:
        return {"exact_match": self.exact_match, "kendall_tau": self.kendall_tau, "count": self.count}


def order_tau(predicted: OrderLabel, gold: OrderLabel) -> float:
    """Kendall tau between predicted and gold ranks of the real triplets; 1 for a single triplet."""
    n = gold.n_real
    if n <= 1:
        return 1.0
    tau, _ = kendalltau(list(predicted.ranks[:n]), list(gold.ranks[:n]))
    return 0.0 if tau is None or math.isnan(tau) else float(tau)


def order_metrics(predicted: Sequence[OrderLabel], gold: Sequence[OrderLabel]) -> OrderMetrics:
    """Exact-permutation accuracy (%) and mean Kendall tau."""
    if len(predicted) != len(gold):
        raise ValueError(f"Got {len(predicted)} predicted orders for {len(gold)} gold orders")
    if not gold:
        return OrderMetrics(exact_match=0.0, kendall_tau=0.0, count=0)
    exact = [p.listing() == g.listing() for p, g in zip(predicted, gold)]
    taus = [order_tau(p, g) for p, g in zip(predicted, gold)]
    return OrderMetrics(
        exact_match=100.0 * float(np.mean(exact)),
        kendall_tau=float(np.mean(taus)),
        count=len(gold),
    )


# Graph-size buckets


def size_bucket(n_triplets: int) -> str:
    if n_triplets <= 3:
        return SIZE_BUCKETS[0]
    if n_triplets <= 6:
        return SIZE_BUCKETS[1]
    return SIZE_BUCKETS[2]


def bucketed_bleu(hypotheses: Sequence[str], references: References, sizes: Sequence[int]) -> Dict[str, Dict[str, float]]:
    """Corpus BLEU-4 per graph-size bucket; empty buckets are omitted."""
    refs = _check(hypotheses, references)
    grouped: Dict[str, Tuple[List[str], List[List[str]]]] = {}
    for hyp, ref, size in zip(hypotheses, refs, sizes):
        hyps, rs = grouped.setdefault(size_bucket(size), ([], []))
        hyps.append(hyp)
        rs.append(ref)
    return {
        bucket: {"bleu4": bleu4(*grouped[bucket]), "count": len(grouped[bucket][0])}
        for bucket in SIZE_BUCKETS
        if bucket in grouped
    }
