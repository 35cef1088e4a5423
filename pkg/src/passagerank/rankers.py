"""The two passage scorers and per-question ranking.

InferSentScorer ranks by semantic similarity: a two-layer network over the
concatenation [q; p; q - p; q * p] of fixed question and paragraph sentence
embeddings. RelationNetScorer ranks by word-level relevance matching: a
learned pairwise function g is applied to every (question word, passage word)
embedding pair, the pair outputs are summed, and a readout network f maps the
sum to a scalar score. Word and sentence embeddings stay frozen; only the
dense networks train.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import (
    Resources,
    compose_paragraph_embedding,
    embed_tokens,
    split_sentences,
)
from .nn import (
    AdamState,
    Checkpoint,
    CheckpointBlock,
    DenseLayerParams,
    MlpSpec,
    Mode,
    ForwardTape,
    init_params,
    load_checkpoint,
    mlp_backward,
    mlp_forward,
    save_checkpoint,
)
from .text import tokenize


class Unscorable(Exception):
    """A passage (or question) has no usable representation; the caller
    ranks such passages last instead of inventing a score."""


class AllUnscorableError(Exception):
    """No candidate passage of a question could be scored."""

    def __init__(self, question_id: str):
        super().__init__(f"no scorable passage for question {question_id!r}")
        self.question_id = question_id


@dataclass
class ScoredPassage:
    passage_id: str
    score: float
    scorable: bool = True


@dataclass
class RankedList:
    question_id: str
    entries: list[ScoredPassage]

    def passage_ids(self) -> list[str]:
        return [e.passage_id for e in self.entries]


def infersent_features(q_vec: np.ndarray, p_vec: np.ndarray) -> np.ndarray:
    """Length-4D feature vector [q; p; q - p; q * p], in that block order."""
    q = np.asarray(q_vec, dtype=np.float64)
    p = np.asarray(p_vec, dtype=np.float64)
    if q.shape != p.shape or q.ndim != 1:
        raise ValueError(f"question/paragraph dimension mismatch: {q.shape} vs {p.shape}")
    return np.concatenate([q, p, q - p, q * p])


class InferSentScorer:
    """Two-layer scorer over infersent_features.

    Default widths follow the full-scale setup (4096-dim sentence vectors,
    500 hidden units, scalar output, dropout 0.5 on the hidden layer); tests
    shrink them freely.
    """

    kind = "infersent"

    def __init__(
        self,
        embed_dim: int = 4096,
        hidden_units: int = 500,
        dropout_p: float = 0.5,
        seed: int = 0,
        params: list[DenseLayerParams] | None = None,
    ):
        self.embed_dim = embed_dim
        self.spec = MlpSpec((4 * embed_dim, hidden_units, 1), dropout_p)
        self.params = params if params is not None else init_params(self.spec, seed)

    @property
    def all_params(self) -> list[DenseLayerParams]:
        return self.params

    def score(
        self,
        q_vec: np.ndarray,
        p_vec: np.ndarray,
        mode: Mode = Mode.EVAL,
        rng: np.random.Generator | None = None,
    ) -> float:
        out, _ = mlp_forward(self.spec, self.params, infersent_features(q_vec, p_vec), mode, rng)
        return float(out[0])

    def score_with_tape(self, q_vec, p_vec, mode: Mode, rng=None) -> tuple[float, ForwardTape]:
        out, tape = mlp_forward(
            self.spec, self.params, infersent_features(q_vec, p_vec), mode, rng
        )
        return float(out[0]), tape

    def backward(self, tape: ForwardTape, dscore: float) -> list[tuple[np.ndarray, np.ndarray]]:
        grads, _ = mlp_backward(self.spec, self.params, tape, np.array([dscore]))
        return grads


@dataclass
class RnTape:
    """Intermediates of one relation-network scoring pass."""

    g_tape: ForwardTape
    f_tape: ForwardTape
    num_pairs: int


class RelationNetScorer:
    """Relation-network scorer over all question-word x passage-word pairs.

    g consumes the concatenation of the two word embeddings and f maps the
    summed pair outputs to a scalar. Default widths follow the full-scale
    setup: 300-dim embeddings, g layers (300, 300, 5), f layers (5, 5, 1),
    dropout 0.5 on every hidden layer.
    """

    kind = "rn"

    def __init__(
        self,
        embed_dim: int = 300,
        g_units: tuple[int, ...] = (300, 300, 5),
        f_units: tuple[int, ...] = (5, 5, 1),
        dropout_p: float = 0.5,
        seed: int = 0,
        g_params: list[DenseLayerParams] | None = None,
        f_params: list[DenseLayerParams] | None = None,
    ):
        self.embed_dim = embed_dim
        self.g_spec = MlpSpec((2 * embed_dim,) + tuple(g_units), dropout_p)
        self.f_spec = MlpSpec((g_units[-1],) + tuple(f_units), dropout_p)
        if g_params is None or f_params is None:
            seeds = np.random.SeedSequence(seed).spawn(2)
            g_params = g_params if g_params is not None else init_params(self.g_spec, seeds[0])
            f_params = f_params if f_params is not None else init_params(self.f_spec, seeds[1])
        self.g_params = g_params
        self.f_params = f_params

    @property
    def all_params(self) -> list[DenseLayerParams]:
        return self.g_params + self.f_params

    def _pair_matrix(self, q_words: np.ndarray, p_words: np.ndarray) -> np.ndarray:
        q = np.asarray(q_words, dtype=np.float64)
        p = np.asarray(p_words, dtype=np.float64)
        if q.ndim != 2 or p.ndim != 2:
            raise ValueError("word matrices must be 2-D (tokens x dim)")
        if q.shape[0] < 1 or p.shape[0] < 1:
            raise Unscorable("empty question or passage after embedding")
        if q.shape[1] != self.embed_dim or p.shape[1] != self.embed_dim:
            raise ValueError(
                f"word dimension must be {self.embed_dim}, got {q.shape[1]}/{p.shape[1]}"
            )
        # row k holds pair (i = k // m, j = k % m)
        return np.concatenate(
            [np.repeat(q, p.shape[0], axis=0), np.tile(p, (q.shape[0], 1))], axis=1
        )

    def score(
        self,
        q_words: np.ndarray,
        p_words: np.ndarray,
        mode: Mode = Mode.EVAL,
        rng: np.random.Generator | None = None,
    ) -> float:
        """Batched evaluation of all pairs, value-equivalent to
        rn_score_bruteforce.

        In Eval mode each component of the pair-output sum is accumulated in
        sorted order, so the score is exactly invariant under any permutation
        of question words or passage words.
        """
        pairs = self._pair_matrix(q_words, p_words)
        g_out, _ = mlp_forward(self.g_spec, self.g_params, pairs, mode, rng)
        if mode is Mode.EVAL:
            summed = np.array([np.sort(col).sum() for col in g_out.T])
        else:
            summed = g_out.sum(axis=0)
        out, _ = mlp_forward(self.f_spec, self.f_params, summed, mode, rng)
        return float(out[0])

    def score_with_tape(self, q_words, p_words, mode: Mode, rng=None) -> tuple[float, RnTape]:
        pairs = self._pair_matrix(q_words, p_words)
        g_out, g_tape = mlp_forward(self.g_spec, self.g_params, pairs, mode, rng)
        summed = g_out.sum(axis=0)
        out, f_tape = mlp_forward(self.f_spec, self.f_params, summed, mode, rng)
        return float(out[0]), RnTape(g_tape, f_tape, pairs.shape[0])

    def backward(self, tape: RnTape, dscore: float) -> list[tuple[np.ndarray, np.ndarray]]:
        """Gradients for g_params + f_params, in all_params order."""
        f_grads, d_summed = mlp_backward(
            self.f_spec, self.f_params, tape.f_tape, np.array([dscore])
        )
        # the sum over pairs distributes the gradient to every pair output
        d_pairs = np.tile(d_summed, (tape.num_pairs, 1))
        g_grads, _ = mlp_backward(self.g_spec, self.g_params, tape.g_tape, d_pairs)
        return g_grads + f_grads


def rn_score_bruteforce(
    scorer: RelationNetScorer, q_words: np.ndarray, p_words: np.ndarray
) -> float:
    """Reference oracle: explicit double loop over word pairs, sequential
    accumulation in (question index, passage index) order, Eval mode."""
    q = np.asarray(q_words, dtype=np.float64)
    p = np.asarray(p_words, dtype=np.float64)
    if q.shape[0] < 1 or p.shape[0] < 1:
        raise Unscorable("empty question or passage after embedding")
    total = np.zeros(scorer.g_spec.output_dim)
    for i in range(q.shape[0]):
        for j in range(p.shape[0]):
            pair = np.concatenate([q[i], p[j]])
            g_out, _ = mlp_forward(scorer.g_spec, scorer.g_params, pair)
            total += g_out
    out, _ = mlp_forward(scorer.f_spec, scorer.f_params, total)
    return float(out[0])


class InferSentRanker:
    """Scores passages from precomputed sentence embeddings.

    The question vector is looked up under the question identifier. A passage
    vector is looked up pre-composed under the bare passage identifier, or
    composed by summing the "passageId#sentenceIndex" entries for the
    passage's sentences.
    """

    kind = "infersent"

    def __init__(self, scorer: InferSentScorer):
        self.scorer = scorer

    def question_repr(self, question, resources: Resources) -> np.ndarray:
        store = resources.sentence_store
        if store is None or question.question_id not in store:
            raise Unscorable(f"no sentence embedding for question {question.question_id!r}")
        return np.asarray(store[question.question_id], dtype=np.float64)

    def passage_repr(self, passage_id: str, passage_text: str, resources: Resources):
        store = resources.sentence_store
        if store is None:
            raise Unscorable("no sentence-embedding store loaded")
        if passage_id in store:
            return np.asarray(store[passage_id], dtype=np.float64)
        vecs = []
        for i in range(len(split_sentences(passage_text))):
            key = f"{passage_id}#{i}"
            if key in store:
                vecs.append(store[key])
        if not vecs:
            raise Unscorable(f"no sentence embeddings for passage {passage_id!r}")
        return compose_paragraph_embedding(vecs)

    def score_pair(self, q_repr, p_repr, mode: Mode = Mode.EVAL, rng=None) -> float:
        return self.scorer.score(q_repr, p_repr, mode, rng)

    def score_pair_with_tape(self, q_repr, p_repr, mode: Mode, rng=None):
        return self.scorer.score_with_tape(q_repr, p_repr, mode, rng)

    def backward(self, tape, dscore: float):
        return self.scorer.backward(tape, dscore)


class RelationNetRanker:
    """Scores passages from frozen word embeddings filtered by a vocabulary.

    Passages are truncated to the first max_passage_tokens tokens before
    embedding to bound the pair count. Tokens missing from the vocabulary or
    the embedding table are skipped; a side with no embedded tokens is
    unscorable.
    """

    kind = "rn"

    def __init__(self, scorer: RelationNetScorer, max_passage_tokens: int = 100):
        self.scorer = scorer
        self.max_passage_tokens = max_passage_tokens

    def question_repr(self, question, resources: Resources) -> np.ndarray:
        if resources.word_table is None:
            raise Unscorable("no word-embedding table loaded")
        matrix = embed_tokens(
            resources.word_table, tokenize(question.question_text), resources.vocab
        )
        if matrix.shape[0] == 0:
            raise Unscorable(f"question {question.question_id!r} has no embedded tokens")
        return matrix

    def passage_repr(self, passage_id: str, passage_text: str, resources: Resources):
        if resources.word_table is None:
            raise Unscorable("no word-embedding table loaded")
        tokens = tokenize(passage_text)[: self.max_passage_tokens]
        matrix = embed_tokens(resources.word_table, tokens, resources.vocab)
        if matrix.shape[0] == 0:
            raise Unscorable(f"passage {passage_id!r} has no embedded tokens")
        return matrix

    def score_pair(self, q_repr, p_repr, mode: Mode = Mode.EVAL, rng=None) -> float:
        return self.scorer.score(q_repr, p_repr, mode, rng)

    def score_pair_with_tape(self, q_repr, p_repr, mode: Mode, rng=None):
        return self.scorer.score_with_tape(q_repr, p_repr, mode, rng)

    def backward(self, tape, dscore: float):
        return self.scorer.backward(tape, dscore)


def rank_passages(ranker, question, resources: Resources) -> RankedList:
    """Score every candidate passage in Eval mode and order them by
    descending score, ties broken by ascending original passage index.
    Unscorable passages go last, keeping their original order. Raises
    AllUnscorableError when nothing can be scored."""
    if not question.passages:
        raise ValueError(f"question {question.question_id!r} has no candidate passages")
    try:
        q_repr = ranker.question_repr(question, resources)
    except Unscorable:
        q_repr = None

    scored: list[tuple[float, int, ScoredPassage]] = []
    unscorable: list[ScoredPassage] = []
    for idx, (passage_id, passage_text) in enumerate(question.passages):
        if q_repr is None:
            unscorable.append(ScoredPassage(passage_id, float("nan"), scorable=False))
            continue
        try:
            p_repr = ranker.passage_repr(passage_id, passage_text, resources)
            score = ranker.score_pair(q_repr, p_repr)
        except Unscorable:
            unscorable.append(ScoredPassage(passage_id, float("nan"), scorable=False))
            continue
        scored.append((score, idx, ScoredPassage(passage_id, score)))

    if not scored:
        raise AllUnscorableError(question.question_id)
    scored.sort(key=lambda item: (-item[0], item[1]))
    return RankedList(question.question_id, [entry for _, _, entry in scored] + unscorable)


def make_ranker(
    model_kind: str,
    embed_dim: int | None = None,
    dropout_p: float = 0.5,
    seed: int = 0,
    hidden_units: int = 500,
    g_units: tuple[int, ...] = (300, 300, 5),
    f_units: tuple[int, ...] = (5, 5, 1),
    max_passage_tokens: int = 100,
):
    """Construct a fresh ranker of the named kind with seeded parameters."""
    if model_kind == "infersent":
        scorer = InferSentScorer(
            embed_dim if embed_dim is not None else 4096, hidden_units, dropout_p, seed
        )
        return InferSentRanker(scorer)
    if model_kind == "rn":
        scorer = RelationNetScorer(
            embed_dim if embed_dim is not None else 300, g_units, f_units, dropout_p, seed
        )
        return RelationNetRanker(scorer, max_passage_tokens)
    raise ValueError(f"unknown model kind {model_kind!r}")


def save_ranker(
    path,
    ranker,
    seed: int,
    adam_states: dict[str, AdamState] | None = None,
) -> None:
    """Persist a ranker (and optionally its optimizer state) to a checkpoint."""
    adam_states = adam_states or {}
    if ranker.kind == "infersent":
        scorer = ranker.scorer
        blocks = [CheckpointBlock("scorer", scorer.spec, scorer.params, adam_states.get("scorer"))]
        extras = {"embed_dim": float(scorer.embed_dim)}
    elif ranker.kind == "rn":
        scorer = ranker.scorer
        blocks = [
            CheckpointBlock("g", scorer.g_spec, scorer.g_params, adam_states.get("g")),
            CheckpointBlock("f", scorer.f_spec, scorer.f_params, adam_states.get("f")),
        ]
        extras = {
            "embed_dim": float(scorer.embed_dim),
            "max_passage_tokens": float(ranker.max_passage_tokens),
        }
    else:
        raise ValueError(f"unknown ranker kind {ranker.kind!r}")
    save_checkpoint(path, ranker.kind, seed, blocks, extras)


def load_ranker(path) -> tuple[object, Checkpoint]:
    """Rebuild a ranker from a checkpoint written by save_ranker."""
    ckpt = load_checkpoint(path)
    if ckpt.model_kind == "infersent":
        block = ckpt.block("scorer")
        embed_dim = int(ckpt.extras.get("embed_dim", block.spec.input_dim // 4))
        scorer = InferSentScorer(
            embed_dim,
            hidden_units=block.spec.layer_sizes[1],
            dropout_p=block.spec.dropout_p,
            params=block.params,
        )
        return InferSentRanker(scorer), ckpt
    if ckpt.model_kind == "rn":
        g, f = ckpt.block("g"), ckpt.block("f")
        embed_dim = int(ckpt.extras.get("embed_dim", g.spec.input_dim // 2))
        scorer = RelationNetScorer(
            embed_dim,
            g_units=g.spec.layer_sizes[1:],
            f_units=f.spec.layer_sizes[1:],
            dropout_p=g.spec.dropout_p,
            g_params=g.params,
            f_params=f.params,
        )
        cap = int(ckpt.extras.get("max_passage_tokens", 100))
        return RelationNetRanker(scorer, cap), ckpt
    raise ValueError(f"unknown model kind {ckpt.model_kind!r} in checkpoint")
