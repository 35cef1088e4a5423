"""Paragraph selection, answer aggregation, and evaluation metrics.

Selection turns the top-k ranked scores into probabilities with a numerically
stable softmax, multiplies each passage probability with the reader's
conditional answer-span probabilities, and keeps the highest product.
Metrics are recall@K over ranked lists plus the standard extractive-QA
exact-match and token-overlap F1.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .rankers import RankedList
from .text import contains_answer, normalize_answer


@dataclass
class ReaderOutput:
    """Candidate answer spans with conditional probabilities for one
    (question, passage) pair."""

    question_id: str
    passage_id: str
    candidates: list[tuple[str, float]]

    def __post_init__(self):
        if not self.candidates:
            raise ValueError("reader output needs at least one candidate span")
        for text, prob in self.candidates:
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"candidate probability out of [0, 1]: {prob} for {text!r}")


@dataclass
class AnswerDecision:
    question_id: str
    chosen_answer: str
    chosen_passage_id: str
    confidence: float


def softmax_top_k(ranked: RankedList, k: int = 5) -> list[tuple[str, float]]:
    """Softmax over the scores of the top min(k, available) scorable
    passages; probabilities are strictly positive and sum to 1."""
    if k < 1:
        raise ValueError("k must be >= 1")
    top = [e for e in ranked.entries if e.scorable][:k]
    if not top:
        raise ValueError(f"ranked list for {ranked.question_id!r} has no scorable passage")
    scores = np.array([e.score for e in top], dtype=np.float64)
    exp = np.exp(scores - scores.max())
    probs = exp / exp.sum()
    return [(e.passage_id, float(p)) for e, p in zip(top, probs)]


def combine_answer_scores(
    question_id: str,
    passage_probs: Sequence[tuple[str, float]],
    reader_outputs: Sequence[ReaderOutput],
) -> AnswerDecision:
    """Choose the (passage, span) pair maximizing P(passage) * P(span | passage).

    Ties go to the higher-ranked passage, then the lexicographically smaller
    answer string. Raises when no top-k passage has reader output.
    """
    by_passage = {out.passage_id: out for out in reader_outputs}
    best = None
    for rank_pos, (passage_id, p_passage) in enumerate(passage_probs):
        output = by_passage.get(passage_id)
        if output is None:
            continue
        for answer, p_answer in output.candidates:
            key = (-p_passage * p_answer, rank_pos, answer)
            if best is None or key < best[0]:
                best = (key, AnswerDecision(question_id, answer, passage_id, p_passage * p_answer))
    if best is None:
        raise ValueError(f"no reader output for any selected passage of question {question_id!r}")
    return best[1]


def recall_at_k(
    ranked_lists: Sequence[RankedList],
    questions_by_id: dict,
    k: int,
) -> float:
    """Fraction of questions whose top-k passages include one containing a
    gold answer string (token-boundary containment after normalization)."""
    if not ranked_lists:
        raise ValueError("no ranked lists to evaluate")
    hits = 0
    for ranked in ranked_lists:
        question = questions_by_id[ranked.question_id]
        texts = dict(question.passages)
        for entry in ranked.entries[:k]:
            if contains_answer(texts[entry.passage_id], question.gold_answers):
                hits += 1
                break
    return hits / len(ranked_lists)


def exact_match(prediction: str, golds: Sequence[str]) -> int:
    """1 iff the normalized prediction equals some normalized gold answer."""
    if not golds:
        raise ValueError("golds must be nonempty")
    pred = normalize_answer(prediction)
    return int(any(pred == normalize_answer(g) for g in golds))


def f1_score(prediction: str, golds: Sequence[str]) -> float:
    """Max over golds of the harmonic mean of token precision and recall on
    normalized token multisets. Empty-vs-empty scores 1, empty-vs-nonempty 0."""
    if not golds:
        raise ValueError("golds must be nonempty")
    pred_tokens = normalize_answer(prediction).split()
    best = 0.0
    for gold in golds:
        gold_tokens = normalize_answer(gold).split()
        if not pred_tokens or not gold_tokens:
            best = max(best, float(pred_tokens == gold_tokens))
            continue
        common = Counter(pred_tokens) & Counter(gold_tokens)
        num_same = sum(common.values())
        if num_same == 0:
            continue
        precision = num_same / len(pred_tokens)
        recall = num_same / len(gold_tokens)
        best = max(best, 2 * precision * recall / (precision + recall))
    return best


# ---------------------------------------------------------------------------
# Interchange files (line-delimited JSON; field names documented in
# docs/formats.md)
# ---------------------------------------------------------------------------


def load_reader_outputs(path) -> list[ReaderOutput]:
    """Read reader-output records: one JSON object per line with fields
    question_id, passage_id, candidates = [{"text": ..., "prob": ...}]."""
    outputs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                outputs.append(
                    ReaderOutput(
                        obj["question_id"],
                        obj["passage_id"],
                        [(c["text"], float(c["prob"])) for c in obj["candidates"]],
                    )
                )
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed reader output ({exc})") from exc
    return outputs


def save_reader_outputs(path, outputs: Sequence[ReaderOutput]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for out in outputs:
            fh.write(
                json.dumps(
                    {
                        "question_id": out.question_id,
                        "passage_id": out.passage_id,
                        "candidates": [{"text": t, "prob": p} for t, p in out.candidates],
                    }
                )
                + "\n"
            )


def save_decisions(path, decisions: Sequence[AnswerDecision]) -> None:
    """One JSON object per line: question_id, answer, passage_id, confidence."""
    with open(path, "w", encoding="utf-8") as fh:
        for d in decisions:
            fh.write(
                json.dumps(
                    {
                        "question_id": d.question_id,
                        "answer": d.chosen_answer,
                        "passage_id": d.chosen_passage_id,
                        "confidence": d.confidence,
                    }
                )
                + "\n"
            )


def load_decisions(path) -> list[AnswerDecision]:
    decisions = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            decisions.append(
                AnswerDecision(
                    obj["question_id"], obj["answer"], obj["passage_id"], obj["confidence"]
                )
            )
    return decisions
