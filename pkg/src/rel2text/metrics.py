"""Reference-based lexical metrics and referenceless diversity metrics.

All metrics share one tokenizer: split on whitespace, then every character
that is not alphanumeric becomes a standalone token, except "-" between
alphanumerics and "." between ASCII digits, which stay inside the token
("1970-09-07" and "3.5" are single tokens; a sentence-final "." is its own
token). Case is preserved; the diversity metrics lowercase internally.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field

import requests

from .errors import (
    EmptyCorpus,
    ExternalScorerUnavailable,
    LengthMismatch,
    NoBigrams,
)
from .stem import porter_stem

logger = logging.getLogger(__name__)

TOKENIZER_ID = "rel2text-v1"

# METEOR parameters: F-mean recall weight, fragmentation exponent, penalty weight.
METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5


def tokenize(text: str) -> list[str]:
    """Deterministic rule-based tokenization (see module docstring)."""
    tokens: list[str] = []
    for chunk in text.split():
        current: list[str] = []
        for i, ch in enumerate(chunk):
            if ch.isalnum():
                current.append(ch)
                continue
            prev_ch = chunk[i - 1] if i > 0 else ""
            next_ch = chunk[i + 1] if i + 1 < len(chunk) else ""
            if ch == "-" and prev_ch.isalnum() and next_ch.isalnum():
                current.append(ch)
                continue
            if ch == "." and "0" <= prev_ch <= "9" and "0" <= next_ch <= "9":
                current.append(ch)
                continue
            if current:
                tokens.append("".join(current))
                current = []
            tokens.append(ch)
        if current:
            tokens.append("".join(current))
    return tokens


def _ngrams(tokens: list[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def _as_reference_lists(references) -> list[list[str]]:
    return [[ref] if isinstance(ref, str) else list(ref) for ref in references]


def _check_aligned(hypotheses, references) -> list[list[str]]:
    if len(hypotheses) == 0:
        raise EmptyCorpus("no hypotheses to score")
    refs = _as_reference_lists(references)
    if len(hypotheses) != len(refs):
        raise LengthMismatch(
            f"{len(hypotheses)} hypotheses vs {len(refs)} references"
        )
    return refs


# ---------------------------------------------------------------------------
# BLEU

def corpus_bleu(hypotheses: list[str], references) -> float:
    """Corpus-level BLEU-4, no smoothing, on the 0..100 scale.

    Geometric mean of modified n-gram precisions (n = 1..4) times the brevity
    penalty exp(1 - r/c) for c <= r; a zero precision at any order yields 0.
    References may be single strings or lists of alternatives per segment.
    """
    refs = _check_aligned(hypotheses, references)
    matched = [0] * 4
    total = [0] * 4
    hyp_len = 0
    ref_len = 0
    for hyp, alternatives in zip(hypotheses, refs):
        hyp_tokens = tokenize(hyp)
        ref_token_lists = [tokenize(ref) for ref in alternatives]
        hyp_len += len(hyp_tokens)
        # Effective reference length: closest to the hypothesis, shorter wins ties.
        ref_len += min(
            (len(r) for r in ref_token_lists),
            key=lambda n: (abs(n - len(hyp_tokens)), n),
        )
        for n in range(1, 5):
            hyp_counts = Counter(_ngrams(hyp_tokens, n))
            max_ref_counts: Counter = Counter()
            for ref_tokens in ref_token_lists:
                for gram, count in Counter(_ngrams(ref_tokens, n)).items():
                    max_ref_counts[gram] = max(max_ref_counts[gram], count)
            total[n - 1] += sum(hyp_counts.values())
            matched[n - 1] += sum(
                min(count, max_ref_counts[gram]) for gram, count in hyp_counts.items()
            )
    if hyp_len == 0 or any(m == 0 or t == 0 for m, t in zip(matched, total)):
        return 0.0
    log_precision = math.fsum(
        math.log(m / t) for m, t in zip(matched, total)
    )
    brevity = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return 100.0 * brevity * math.exp(log_precision / 4.0)


# ---------------------------------------------------------------------------
# METEOR

def _meteor_align(hyp_tokens: list[str], ref_tokens: list[str]) -> list[tuple[int, int]]:
    """Two-stage one-to-one alignment: exact match, then Porter-stem match.

    Each stage walks the hypothesis left to right and pairs every unmatched
    token with the leftmost unmatched compatible reference token.
    """
    matches: list[tuple[int, int]] = []
    hyp_free = [True] * len(hyp_tokens)
    ref_free = [True] * len(ref_tokens)

    def run_stage(key) -> None:
        ref_keys = [key(token) for token in ref_tokens]
        for i, token in enumerate(hyp_tokens):
            if not hyp_free[i]:
                continue
            want = key(token)
            for j, ref_key in enumerate(ref_keys):
                if ref_free[j] and ref_key == want:
                    matches.append((i, j))
                    hyp_free[i] = False
                    ref_free[j] = False
                    break

    run_stage(lambda token: token)
    run_stage(lambda token: porter_stem(token.lower()))
    return sorted(matches)


def _meteor_segment(
    hyp_tokens: list[str],
    ref_tokens: list[str],
    alpha: float,
    beta: float,
    gamma: float,
) -> float:
    if not hyp_tokens or not ref_tokens:
        return 0.0
    matches = _meteor_align(hyp_tokens, ref_tokens)
    m = len(matches)
    if m == 0:
        return 0.0
    precision = m / len(hyp_tokens)
    recall = m / len(ref_tokens)
    fmean = precision * recall / (alpha * precision + (1 - alpha) * recall)
    chunks = 1
    for (hi, ri), (hj, rj) in zip(matches, matches[1:]):
        if hj != hi + 1 or rj != ri + 1:
            chunks += 1
    # A single chunk is a contiguous alignment: no fragmentation to penalize.
    penalty = 0.0 if chunks == 1 else gamma * (chunks / m) ** beta
    return fmean * (1.0 - penalty)


def meteor(
    hypotheses: list[str],
    references,
    alpha: float = METEOR_ALPHA,
    beta: float = METEOR_BETA,
    gamma: float = METEOR_GAMMA,
) -> float:
    """Alignment-based METEOR averaged over segments, 0..100 scale.

    Stages: exact match and Porter-stem match (no synonym stage). With
    multiple references per segment the best-scoring reference counts.
    """
    refs = _check_aligned(hypotheses, references)
    scores = []
    for hyp, alternatives in zip(hypotheses, refs):
        hyp_tokens = tokenize(hyp)
        scores.append(
            max(
                _meteor_segment(hyp_tokens, tokenize(ref), alpha, beta, gamma)
                for ref in alternatives
            )
        )
    return 100.0 * math.fsum(scores) / len(scores)


# ---------------------------------------------------------------------------
# Referenceless diversity metrics

def _lower_token_lists(outputs: list[str]) -> list[list[str]]:
    return [[token.lower() for token in tokenize(output)] for output in outputs]


def unique_ngrams(outputs: list[str], n: int) -> int:
    """Distinct lowercased n-gram types; n-grams never cross output boundaries."""
    if n < 1:
        raise ValueError("n must be >= 1")
    types: set[tuple[str, ...]] = set()
    for tokens in _lower_token_lists(outputs):
        types.update(_ngrams(tokens, n))
    return len(types)


def bigram_conditional_entropy(outputs: list[str]) -> float:
    """H(w2 | w1) in bits over within-sentence bigrams of lowercased tokens."""
    bigram_counts: Counter = Counter()
    for tokens in _lower_token_lists(outputs):
        bigram_counts.update(_ngrams(tokens, 2))
    total = sum(bigram_counts.values())
    if total == 0:
        raise NoBigrams("corpus contains no bigram")
    first_counts: Counter = Counter()
    for (w1, _), count in bigram_counts.items():
        first_counts[w1] += count
    return -math.fsum(
        (count / total) * math.log2(count / first_counts[w1])
        for (w1, _), count in bigram_counts.items()
    )


def msttr(outputs: list[str], segment_len: int = 100) -> float:
    """Mean segmental type-token ratio over consecutive fixed-length segments.

    All output tokens are lowercased and concatenated in corpus order; the
    final partial segment is discarded. A corpus shorter than one segment is
    scored over the single truncated segment, with a warning.
    """
    tokens = [token for token_list in _lower_token_lists(outputs) for token in token_list]
    if not tokens:
        raise EmptyCorpus("no tokens for MSTTR")
    if len(tokens) < segment_len:
        logger.warning(
            "MSTTR corpus has %d tokens, fewer than one %d-token segment",
            len(tokens),
            segment_len,
        )
        return len(set(tokens)) / len(tokens)
    ratios = [
        len(set(tokens[start : start + segment_len])) / segment_len
        for start in range(0, len(tokens) - segment_len + 1, segment_len)
    ]
    return math.fsum(ratios) / len(ratios)


def mean_length(outputs: list[str]) -> float:
    """Arithmetic mean of per-output token counts."""
    if not outputs:
        raise EmptyCorpus("no outputs")
    return math.fsum(len(tokenize(output)) for output in outputs) / len(outputs)


# ---------------------------------------------------------------------------
# Report assembly

EXTERNAL_SCORE_KEYS = ("ss", "c", "n", "e", "nb", "bleurt", "ppl")


@dataclass
class MetricReport:
    bleu: float
    meteor: float
    u1: int
    ce2: float
    msttr: float
    mean_len: float
    external_scores: dict[str, float] | None = None
    meteor_params: dict[str, float] = field(
        default_factory=lambda: {
            "alpha": METEOR_ALPHA,
            "beta": METEOR_BETA,
            "gamma": METEOR_GAMMA,
        }
    )

    def to_dict(self) -> dict:
        report = {
            "bleu": self.bleu,
            "meteor": self.meteor,
            "u1": self.u1,
            "ce2": self.ce2,
            "msttr": self.msttr,
            "mean_len": self.mean_len,
            "tokenizer_id": TOKENIZER_ID,
            "meteor_params": self.meteor_params,
        }
        if self.external_scores is not None:
            report["external_scores"] = self.external_scores
        return report


def fetch_external_scores(
    endpoint: str, hypotheses: list[str], references: list[str], timeout: float = 30.0
) -> dict[str, float]:
    """Mean per-key scores from an external scorer speaking the /score protocol."""
    payload = {
        "pairs": [
            {"hyp": hyp, "ref": ref} for hyp, ref in zip(hypotheses, references)
        ]
    }
    try:
        response = requests.post(
            endpoint.rstrip("/") + "/score", json=payload, timeout=timeout
        )
        response.raise_for_status()
        body = response.json()
    except (requests.RequestException, ValueError) as exc:
        raise ExternalScorerUnavailable(str(exc)) from exc
    scores = body.get("scores")
    if not isinstance(scores, list) or len(scores) != len(hypotheses):
        raise LengthMismatch(
            f"scorer returned {len(scores) if isinstance(scores, list) else 'no'} "
            f"entries for {len(hypotheses)} pairs"
        )
    aggregated: dict[str, float] = {}
    for key in EXTERNAL_SCORE_KEYS:
        values = [entry[key] for entry in scores if key in entry]
        if values:
            aggregated[key] = math.fsum(values) / len(values)
    return aggregated


def evaluate(
    outputs: list[str],
    references: list[str],
    scorer_endpoint: str | None = None,
    alpha: float = METEOR_ALPHA,
    beta: float = METEOR_BETA,
    gamma: float = METEOR_GAMMA,
) -> MetricReport:
    """Score one run: reference-based and diversity metrics, plus optional
    external-scorer passthrough (unavailability is non-fatal)."""
    external = None
    if scorer_endpoint:
        try:
            external = fetch_external_scores(scorer_endpoint, outputs, references)
        except ExternalScorerUnavailable as exc:
            logger.warning("external scorer unavailable: %s", exc)
    return MetricReport(
        bleu=corpus_bleu(outputs, references),
        meteor=meteor(outputs, references, alpha=alpha, beta=beta, gamma=gamma),
        u1=unique_ngrams(outputs, 1),
        ce2=bigram_conditional_entropy(outputs),
        msttr=msttr(outputs),
        mean_len=mean_length(outputs),
        external_scores=external,
        meteor_params={"alpha": alpha, "beta": beta, "gamma": gamma},
    )
