"""Margin-ranking training for both rankers.

Each optimizer step scores one sampled positive passage and up to k sampled
negatives in Train mode, sums the per-negative hinge terms
max(0, margin - pos + neg_i), backpropagates through the shared scorer
parameters, and applies one Adam update. Embedding tables are never touched.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .embeddings import Resources
from .nn import AdamState, Mode, adam_step, init_adam_state
from .rankers import AllUnscorableError, Unscorable, rank_passages
from .text import contains_answer


@dataclass
class TrainingGroup:
    question_id: str
    positive_passage_id: str
    negative_passage_ids: list[str]


@dataclass
class TrainingConfig:
    learning_rate: float = 0.001
    dropout_p: float = 0.5
    k_negatives: int = 5
    margin: float = 1.0
    max_steps: int | None = None
    max_epochs: int = 10
    eval_every: int | None = None
    patience: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.k_negatives < 1:
            raise ValueError("k_negatives must be >= 1")
        if self.margin <= 0:
            raise ValueError("margin must be positive")


def margin_ranking_loss(
    pos_score: float, neg_scores, margin: float = 1.0
) -> tuple[float, float, np.ndarray]:
    """Sum of hinge terms max(0, margin - pos + neg_i) and its gradients.

    Returns (loss, d_loss/d_pos, d_loss/d_neg as an array); each active term
    contributes -1 toward the positive score and +1 toward its negative.
    """
    neg_scores = np.asarray(neg_scores, dtype=np.float64)
    if neg_scores.size == 0:
        raise ValueError("neg_scores must be nonempty")
    terms = margin - pos_score + neg_scores
    active = terms > 0
    loss = float(terms[active].sum())
    neg_grads = active.astype(np.float64)
    return loss, -float(active.sum()), neg_grads


def partition_passages(question) -> tuple[list[str], list[str]]:
    """Split a question's candidates into positives (contain a gold answer)
    and negatives (do not)."""
    positives, negatives = [], []
    for passage_id, passage_text in question.passages:
        if contains_answer(passage_text, question.gold_answers):
            positives.append(passage_id)
        else:
            negatives.append(passage_id)
    return positives, negatives


def sample_training_group(
    question,
    rng: np.random.Generator,
    k: int = 5,
    partition: tuple[list[str], list[str]] | None = None,
) -> TrainingGroup | None:
    """Uniformly sample one positive and k distinct negatives.

    Returns None (skip) when the question has no positive or no negative;
    when fewer than k negatives exist, all of them are used.
    """
    positives, negatives = partition if partition is not None else partition_passages(question)
    if not positives or not negatives:
        return None
    positive = positives[int(rng.integers(len(positives)))]
    take = min(k, len(negatives))
    chosen = rng.choice(len(negatives), size=take, replace=False)
    return TrainingGroup(question.question_id, positive, [negatives[int(i)] for i in chosen])


def group_loss_and_grads(
    ranker,
    q_repr,
    pos_repr,
    neg_reprs,
    margin: float = 1.0,
    mode: Mode = Mode.TRAIN,
    rng: np.random.Generator | None = None,
) -> tuple[float, list[tuple[np.ndarray, np.ndarray]]]:
    """Forward-score one group, apply the margin loss, and backpropagate.

    Gradients are accumulated over the shared scorer parameters across the
    1 + k forward passes, in ranker.scorer.all_params order.
    """
    pos_score, pos_tape = ranker.score_pair_with_tape(q_repr, pos_repr, mode, rng)
    neg_scores, neg_tapes = [], []
    for neg_repr in neg_reprs:
        score, tape = ranker.score_pair_with_tape(q_repr, neg_repr, mode, rng)
        neg_scores.append(score)
        neg_tapes.append(tape)

    loss, d_pos, d_negs = margin_ranking_loss(pos_score, neg_scores, margin)
    params = ranker.scorer.all_params
    grads = [(np.zeros_like(p.weights), np.zeros_like(p.bias)) for p in params]

    def accumulate(tape, dscore):
        if dscore == 0.0:
            return
        for (gw, gb), (dw, db) in zip(grads, ranker.backward(tape, dscore)):
            gw += dw
            gb += db

    accumulate(pos_tape, d_pos)
    for tape, d_neg in zip(neg_tapes, d_negs):
        accumulate(tape, d_neg)
    return loss, grads


def group_loss(ranker, q_repr, pos_repr, neg_reprs, margin: float = 1.0) -> float:
    """Eval-mode loss of a group; the finite-difference oracle target."""
    pos = ranker.score_pair(q_repr, pos_repr)
    negs = [ranker.score_pair(q_repr, n) for n in neg_reprs]
    loss, _, _ = margin_ranking_loss(pos, negs, margin)
    return loss


@dataclass
class TrainResult:
    ranker: object
    log: list[dict]
    adam_states: dict[str, AdamState]
    steps: int
    best_dev_recall: float | None = None


def _snapshot(ranker) -> list:
    return [p.copy() for p in ranker.scorer.all_params]


def _restore(ranker, snapshot) -> None:
    for param, saved in zip(ranker.scorer.all_params, snapshot):
        param.weights[:] = saved.weights
        param.bias[:] = saved.bias


def _dev_recall_at_1(ranker, dev_questions, resources: Resources) -> float:
    hits = 0
    for question in dev_questions:
        try:
            ranked = rank_passages(ranker, question, resources)
        except AllUnscorableError:
            continue
        top = ranked.entries[0]
        text = dict(question.passages)[top.passage_id]
        if contains_answer(text, question.gold_answers):
            hits += 1
    return hits / len(dev_questions)


def train(
    ranker,
    questions,
    resources: Resources,
    config: TrainingConfig,
    dev_questions=None,
    log_path=None,
) -> TrainResult:
    """Optimize a ranker's scorer on labeled questions.

    Iterates over shuffled questions, resampling each question's group every
    epoch; runs one Adam step per group. When dev_questions are given and
    eval_every is set, dev recall@1 is logged periodically, training stops
    after `patience` evaluations without improvement, and the best-scoring
    parameters are restored before returning.
    """
    if not questions:
        raise ValueError("dataset is empty")
    if config.max_steps == 0:
        return TrainResult(ranker, [], _make_adam_states(ranker, config), 0)

    partitions = {q.question_id: partition_passages(q) for q in questions}
    trainable = [
        q for q in questions if partitions[q.question_id][0] and partitions[q.question_id][1]
    ]
    if not trainable:
        raise ValueError("no trainable questions: every question lacks a positive or a negative")

    sample_seed, dropout_seed = np.random.SeedSequence(config.seed).spawn(2)
    sample_rng = np.random.default_rng(sample_seed)
    dropout_rng = np.random.default_rng(dropout_seed)

    adam_states = _make_adam_states(ranker, config)
    q_repr_cache: dict[str, object] = {}
    p_repr_cache: dict[tuple[str, str], object] = {}

    log: list[dict] = []
    log_fh = open(log_path, "w", encoding="utf-8") if log_path else None

    def emit(record: dict) -> None:
        log.append(record)
        if log_fh:
            log_fh.write(json.dumps(record) + "\n")

    best_recall = None
    best_snapshot = None
    evals_since_best = 0
    step = 0
    stop = False
    try:
        for epoch in range(config.max_epochs):
            if stop:
                break
            for qi in sample_rng.permutation(len(trainable)):
                question = trainable[int(qi)]
                group = sample_training_group(
                    question, sample_rng, config.k_negatives,
                    partitions[question.question_id],
                )
                if group is None:
                    continue
                texts = dict(question.passages)
                try:
                    if question.question_id not in q_repr_cache:
                        q_repr_cache[question.question_id] = ranker.question_repr(
                            question, resources
                        )
                    q_repr = q_repr_cache[question.question_id]

                    def passage_repr(pid):
                        key = (question.question_id, pid)
                        if key not in p_repr_cache:
                            p_repr_cache[key] = ranker.passage_repr(pid, texts[pid], resources)
                        return p_repr_cache[key]

                    pos_repr = passage_repr(group.positive_passage_id)
                    neg_reprs = [passage_repr(pid) for pid in group.negative_passage_ids]
                except Unscorable:
                    continue

                loss, grads = group_loss_and_grads(
                    ranker, q_repr, pos_repr, neg_reprs, config.margin, Mode.TRAIN, dropout_rng
                )
                _apply_adam(ranker, adam_states, grads)
                step += 1
                emit({"step": step, "epoch": epoch, "loss": loss})

                if (
                    dev_questions
                    and config.eval_every
                    and step % config.eval_every == 0
                ):
                    recall = _dev_recall_at_1(ranker, dev_questions, resources)
                    emit({"step": step, "epoch": epoch, "dev_recall_at_1": recall})
                    if best_recall is None or recall > best_recall:
                        best_recall = recall
                        best_snapshot = _snapshot(ranker)
                        evals_since_best = 0
                    else:
                        evals_since_best += 1
                        if evals_since_best >= config.patience:
                            stop = True
                            break
                if config.max_steps is not None and step >= config.max_steps:
                    stop = True
                    break
    finally:
        if log_fh:
            log_fh.close()

    if best_snapshot is not None:
        _restore(ranker, best_snapshot)
    return TrainResult(ranker, log, adam_states, step, best_recall)


def _make_adam_states(ranker, config: TrainingConfig) -> dict[str, AdamState]:
    if ranker.kind == "infersent":
        return {"scorer": init_adam_state(ranker.scorer.params, config.learning_rate)}
    return {
        "g": init_adam_state(ranker.scorer.g_params, config.learning_rate),
        "f": init_adam_state(ranker.scorer.f_params, config.learning_rate),
    }


def _apply_adam(ranker, adam_states: dict[str, AdamState], grads) -> None:
    if ranker.kind == "infersent":
        adam_step(adam_states["scorer"], ranker.scorer.params, grads)
    else:
        n_g = len(ranker.scorer.g_params)
        adam_step(adam_states["g"], ranker.scorer.g_params, grads[:n_g])
        adam_step(adam_states["f"], ranker.scorer.f_params, grads[n_g:])
