"""Brute-force reference implementations used to cross-check the metrics.

Everything here trades speed for obviousness: Fractions instead of running
floats, dicts instead of Counters, regex tokenization instead of a scanner,
and O(n^2) pairwise scans instead of vectorized numpy. Keep these dumb.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from rel2text.stem import porter_stem
from rel2text.transforms import split_camel_case

# A token is an alnum run (Unicode; [^\W_] matches exactly str.isalnum),
# possibly extended by "-" joining alnums or "." joining ASCII digits; any
# other non-space character stands alone.
_TOKEN = re.compile(
    r"[^\W_]+(?:(?:(?<=[0-9])\.(?=[0-9])|-(?=[^\W_]))[^\W_]+)*|."
)


def oracle_tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    for chunk in text.split():
        tokens.extend(_TOKEN.findall(chunk))
    return tokens


def _ngrams(tokens: list[str], n: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - n + 1):
        gram = tuple(tokens[i : i + n])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def oracle_bleu(hypotheses: list[str], references: list[list[str]]) -> float:
    matched = [0, 0, 0, 0]
    total = [0, 0, 0, 0]
    hyp_len = 0
    ref_len = 0
    for hyp, refs in zip(hypotheses, references):
        hyp_tokens = oracle_tokenize(hyp)
        ref_token_lists = [oracle_tokenize(ref) for ref in refs]
        hyp_len += len(hyp_tokens)
        # closest reference length; ties go to the shorter reference
        best = None
        for tokens in ref_token_lists:
            key = (abs(len(tokens) - len(hyp_tokens)), len(tokens))
            if best is None or key < best:
                best = key
        ref_len += best[1]
        for n in range(1, 5):
            hyp_counts = _ngrams(hyp_tokens, n)
            max_ref: dict[tuple[str, ...], int] = {}
            for tokens in ref_token_lists:
                for gram, count in _ngrams(tokens, n).items():
                    if count > max_ref.get(gram, 0):
                        max_ref[gram] = count
            for gram, count in hyp_counts.items():
                matched[n - 1] += min(count, max_ref.get(gram, 0))
                total[n - 1] += count
    if hyp_len == 0:
        return 0.0
    precisions = []
    for n in range(4):
        if total[n] == 0 or matched[n] == 0:
            return 0.0
        precisions.append(Fraction(matched[n], total[n]))
    log_mean = sum(math.log(float(p)) for p in precisions) / 4.0
    if hyp_len > ref_len:
        bp = 1.0
    else:
        bp = math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_mean)


def _align(hyp: list[str], ref: list[str]) -> list[tuple[int, int]]:
    matches: dict[int, int] = {}
    taken: set[int] = set()
    for stage in ("exact", "stem"):
        if stage == "exact":
            hyp_keys = list(hyp)
            ref_keys = list(ref)
        else:
            hyp_keys = [porter_stem(t.lower()) for t in hyp]
            ref_keys = [porter_stem(t.lower()) for t in ref]
        for i in range(len(hyp)):
            if i in matches:
                continue
            for j in range(len(ref)):
                if j in taken:
                    continue
                if hyp_keys[i] == ref_keys[j]:
                    matches[i] = j
                    taken.add(j)
                    break
    return sorted(matches.items())


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    chunks = 0
    prev = None
    for h, r in pairs:
        if prev is None or h != prev[0] + 1 or r != prev[1] + 1:
            chunks += 1
        prev = (h, r)
    return chunks


def oracle_meteor_segment(
    hyp: str, ref: str, alpha: float, beta: float, gamma: float
) -> float:
    hyp_tokens = oracle_tokenize(hyp)
    ref_tokens = oracle_tokenize(ref)
    pairs = _align(hyp_tokens, ref_tokens)
    m = len(pairs)
    if m == 0 or not hyp_tokens or not ref_tokens:
        return 0.0
    precision = Fraction(m, len(hyp_tokens))
    recall = Fraction(m, len(ref_tokens))
    fmean = (precision * recall) / (alpha * precision + (1 - alpha) * recall)
    chunks = _count_chunks(pairs)
    penalty = 0.0 if chunks == 1 else gamma * (chunks / m) ** beta
    return float(fmean) * (1.0 - penalty)


def oracle_meteor(
    hypotheses: list[str],
    references: list[list[str]],
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    scores = []
    for hyp, refs in zip(hypotheses, references):
        scores.append(
            max(oracle_meteor_segment(hyp, ref, alpha, beta, gamma) for ref in refs)
        )
    return 100.0 * sum(scores) / len(scores)


def oracle_u1(outputs: list[str]) -> int:
    seen = set()
    for text in outputs:
        for token in oracle_tokenize(text):
            seen.add(token.lower())
    return len(seen)


def oracle_ce2(outputs: list[str]) -> float:
    joint: dict[tuple[str, str], int] = {}
    first: dict[str, int] = {}
    total = 0
    for text in outputs:
        tokens = [t.lower() for t in oracle_tokenize(text)]
        for a, b in zip(tokens, tokens[1:]):
            joint[(a, b)] = joint.get((a, b), 0) + 1
            first[a] = first.get(a, 0) + 1
            total += 1
    entropy = 0.0
    for (a, _b), count in joint.items():
        p_joint = Fraction(count, total)
        p_cond = Fraction(count, first[a])
        entropy -= float(p_joint) * math.log2(float(p_cond))
    return entropy


def oracle_msttr(outputs: list[str], segment: int = 100) -> float:
    tokens = []
    for text in outputs:
        tokens.extend(t.lower() for t in oracle_tokenize(text))
    if len(tokens) >= segment:
        segments = [
            tokens[i : i + segment]
            for i in range(0, len(tokens) - segment + 1, segment)
        ]
    else:
        segments = [tokens]
    ratios = [Fraction(len(set(seg)), len(seg)) for seg in segments]
    return float(sum(ratios) / len(ratios))


def oracle_mean_len(outputs: list[str]) -> float:
    lengths = [len(oracle_tokenize(text)) for text in outputs]
    return math.fsum(lengths) / len(lengths)


def oracle_cosine(a: list[float], b: list[float]) -> float:
    dot = math.fsum(x * y for x, y in zip(a, b))
    norm_a = math.sqrt(math.fsum(x * x for x in a))
    norm_b = math.sqrt(math.fsum(y * y for y in b))
    return dot / (norm_a * norm_b)


def _lookup(embeddings: dict[str, list[float]], label: str) -> list[float]:
    key = split_camel_case(label)
    if key in embeddings:
        return embeddings[key]
    return embeddings[label]


def oracle_exclusions(
    candidates: list[str],
    reference_labels: list[str],
    embeddings: dict[str, list[float]] | None,
    threshold: float = 0.9,
) -> set[str]:
    """Pairwise scan deciding which candidate relations must be excluded."""
    excluded = set()
    normalized_refs = {split_camel_case(label) for label in reference_labels}
    for label in candidates:
        if split_camel_case(label) in normalized_refs:
            excluded.add(label)
            continue
        if embeddings is None:
            continue
        vector = _lookup(embeddings, label)
        for ref in reference_labels:
            if oracle_cosine(vector, _lookup(embeddings, ref)) > threshold:
                excluded.add(label)
                break
    return excluded
