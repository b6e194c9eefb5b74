"""Recognition-error metrics and paired significance testing.

Edit distance is the classic unit-cost Levenshtein dynamic program; WER and
CER divide it by the reference length, so values can exceed 1 when the
hypothesis is insertion-heavy (reports do not clamp).  WER tokenization
case-folds, strips leading and trailing punctuation per token, and splits
on whitespace, so case and punctuation noise do not pollute occlusion
comparisons.

Significance uses a two-sided paired sign-flip permutation test with the
mean difference as statistic: exact enumeration over all 2^n sign vectors
when that is within the permutation budget, seeded sampling with the
add-one correction otherwise.
"""

from __future__ import annotations

import itertools
import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

_PUNCT = string.punctuation


@dataclass(frozen=True)
class TranscriptWord:
    text: str
    confidence: float


@dataclass(frozen=True)
class Transcript:
    words: tuple[TranscriptWord, ...]

    def __post_init__(self):
        for w in self.words:
            if not 0.0 <= w.confidence <= 1.0:
                raise ValueError(
                    f"confidence {w.confidence!r} outside [0, 1]")

    @property
    def text(self) -> str:
        return " ".join(w.text for w in self.words)

    def to_json_dict(self) -> dict:
        return {"words": [{"text": w.text, "conf": w.confidence}
                          for w in self.words]}


@dataclass(frozen=True)
class ErrorReport:
    wer: float
    cer: float
    mean_confidence: float
    n_ref_words: int
    n_hyp_words: int

    def to_json_dict(self) -> dict:
        return {"wer": self.wer, "cer": self.cer,
                "mean_confidence": self.mean_confidence,
                "n_ref_words": self.n_ref_words,
                "n_hyp_words": self.n_hyp_words}


@dataclass(frozen=True)
class SignificanceResult:
    p_value: float
    statistic: float
    method: str
    permutations: int


def edit_distance(a: Sequence, b: Sequence) -> int:
    """Unit-cost Levenshtein distance between two sequences."""
    n, m = len(a), len(b)
    if m == 0:
        return n
    prev = list(range(m + 1))
    for i in range(1, n + 1):
        cur = [i] + [0] * m
        ai = a[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
        prev = cur
    return prev[m]


def tokenize(text: str) -> list[str]:
    """Case-fold, trim edge punctuation per token, split on whitespace."""
    out = []
    for raw in text.split():
        tok = raw.casefold().strip(_PUNCT)
        if tok:
            out.append(tok)
    return out


def wer(reference, hypothesis) -> float:
    """Word error rate: token Levenshtein over reference token count.

    Accepts raw strings (tokenized here) or pre-split word sequences.
    """
    ref = tokenize(reference) if isinstance(reference, str) else list(reference)
    hyp = tokenize(hypothesis) if isinstance(hypothesis, str) else list(hypothesis)
    if not ref:
        raise ValueError("reference must contain at least one word")
    return edit_distance(ref, hyp) / len(ref)


def cer(reference: str, hypothesis: str) -> float:
    """Character error rate: char Levenshtein over reference length."""
    if not reference:
        raise ValueError("reference must be non-empty")
    return edit_distance(reference, hypothesis) / len(reference)


def mean_confidence(transcript: Transcript) -> float:
    if not transcript.words:
        raise ValueError("transcript has no words")
    return sum(w.confidence for w in transcript.words) / len(transcript.words)


def error_report(reference: str, transcript: Transcript) -> ErrorReport:
    """Bundle WER/CER/confidence for one reference text and transcript.

    CER is computed over the normalized token streams joined without
    spaces, so both metrics see the same casefold/punctuation treatment
    and an empty transcript costs exactly the reference characters.
    """
    ref_tokens = tokenize(reference)
    hyp_tokens = tokenize(transcript.text)
    if not ref_tokens:
        raise ValueError("reference must contain at least one word")
    conf = mean_confidence(transcript) if transcript.words else 0.0
    return ErrorReport(
        wer=edit_distance(ref_tokens, hyp_tokens) / len(ref_tokens),
        cer=cer("".join(ref_tokens), "".join(hyp_tokens)),
        mean_confidence=conf,
        n_ref_words=len(ref_tokens),
        n_hyp_words=len(hyp_tokens))


def paired_permutation_test(a: Sequence[float], b: Sequence[float],
                            permutations: int = 10000,
                            seed: int | None = None) -> SignificanceResult:
    """Two-sided sign-flip permutation test on paired differences.

    Statistic is the mean difference.  When 2^n fits the permutation
    budget every sign vector is enumerated and the p-value is exact
    (count/2^n); otherwise sign vectors are sampled with a seeded
    generator and p = (count+1)/(permutations+1).
    """
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    n = len(a)
    if n < 2:
        raise ValueError("need at least 2 pairs")
    if permutations < 1:
        raise ValueError("permutations must be >= 1")
    diffs = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    observed = float(np.mean(diffs))
    # tolerance so ties at |observed| count as extreme despite float noise
    threshold = abs(observed) - 1e-12 * max(1.0, abs(observed))

    if 2 ** n <= permutations:
        total = 2 ** n
        count = 0
        for signs in itertools.product((1.0, -1.0), repeat=n):
            stat = float(np.mean(diffs * signs))
            if abs(stat) >= threshold:
                count += 1
        return SignificanceResult(
            p_value=count / total, statistic=observed,
            method="exact paired sign-flip permutation", permutations=total)

    rng = np.random.default_rng(seed)
    signs = rng.integers(0, 2, size=(permutations, n)) * 2 - 1
    stats = (signs * diffs).mean(axis=1)
    count = int(np.sum(np.abs(stats) >= threshold))
    return SignificanceResult(
        p_value=(count + 1) / (permutations + 1), statistic=observed,
        method="sampled paired sign-flip permutation",
        permutations=permutations)
