"""Synthetic datasets with planted, learnable ranking signals.

Two generators match the two rankers: a lexical-overlap dataset where the
positive passage shares word types with its question (for the relation-net
ranker), and a topic-embedding dataset where the positive passage's vector is
the question's latent topic plus noise (for the sentence-similarity ranker).
Both plant the gold answer string inside positive passages only, so answer
containment labels and recall metrics line up with the planted signal.
"""

from __future__ import annotations

import json

import numpy as np

from .data import QuestionRecord
from .embeddings import SentenceEmbeddingStore, WordEmbeddingTable


def make_word_table(tokens, dim: int = 16, seed: int = 0, scale: float = 1.0) -> WordEmbeddingTable:
    """Random fixed word vectors for a token list, deterministic per seed."""
    rng = np.random.default_rng(seed)
    vectors = {tok: scale * rng.normal(size=dim) for tok in tokens}
    return WordEmbeddingTable(vectors, dim)


def lexical_overlap_dataset(
    num_questions: int = 200,
    passages_per_question: int = 10,
    question_tokens: int = 5,
    overlap_tokens: int = 3,
    filler_tokens: int = 3,
    content_pool: int = 60,
    filler_pool: int = 30,
    shared_answer: str | None = None,
    seed: int = 0,
) -> tuple[list[QuestionRecord], list[str]]:
    """Questions whose single positive passage repeats some question words
    and contains the gold answer token; negatives use disjoint content words.

    Returns the records and the full token inventory (for building word
    tables). With shared_answer set, every question uses that answer token,
    making it a frequent marker that survives vocabulary filtering.
    """
    rng = np.random.default_rng(seed)
    content = [f"topic{i}" for i in range(content_pool)]
    filler = [f"filler{i}" for i in range(filler_pool)]
    questions = []
    answers = set()
    for qi in range(num_questions):
        qid = f"q{qi:04d}"
        topic_idx = rng.choice(content_pool, size=question_tokens, replace=False)
        topic = [content[i] for i in topic_idx]
        answer = shared_answer if shared_answer else f"answer{qi}"
        answers.add(answer)
        positive_pos = int(rng.integers(passages_per_question))
        passages = []
        for pj in range(passages_per_question):
            pid = f"{qid}-p{pj:03d}"
            fill = [filler[i] for i in rng.choice(filler_pool, size=filler_tokens, replace=False)]
            if pj == positive_pos:
                shared = [topic[i] for i in rng.choice(question_tokens, size=overlap_tokens, replace=False)]
                words = shared + [answer] + fill
            else:
                non_topic = [t for t in content if t not in topic]
                other_idx = rng.choice(len(non_topic), size=overlap_tokens, replace=False)
                words = [non_topic[i] for i in other_idx] + fill
            passages.append((pid, " ".join(words)))
        questions.append(QuestionRecord(qid, " ".join(topic), [answer], passages))
    return questions, content + filler + sorted(answers)


def topic_embedding_dataset(
    num_questions: int = 200,
    passages_per_question: int = 10,
    dim: int = 16,
    noise: float = 0.1,
    seed: int = 0,
) -> tuple[list[QuestionRecord], SentenceEmbeddingStore]:
    """Questions and passages with precomputed sentence vectors: the question
    and its single positive passage share a latent unit topic vector plus
    noise; negatives get unrelated topics. Passage vectors are stored
    pre-composed under the bare passage identifier."""
    rng = np.random.default_rng(seed)

    def unit(v):
        return v / np.linalg.norm(v)

    vectors: dict[str, np.ndarray] = {}
    questions = []
    for qi in range(num_questions):
        qid = f"q{qi:04d}"
        topic = unit(rng.normal(size=dim))
        vectors[qid] = (topic + noise * rng.normal(size=dim)).astype(np.float32)
        answer = f"answer{qi}"
        positive_pos = int(rng.integers(passages_per_question))
        passages = []
        for pj in range(passages_per_question):
            pid = f"{qid}-p{pj:03d}"
            if pj == positive_pos:
                vec = topic + noise * rng.normal(size=dim)
                text = f"the answer here is {answer} indeed"
            else:
                vec = unit(rng.normal(size=dim)) + noise * rng.normal(size=dim)
                text = "this passage talks about something unrelated"
            vectors[pid] = vec.astype(np.float32)
            passages.append((pid, text))
        questions.append(QuestionRecord(qid, f"question number {qi}", [answer], passages))
    return questions, SentenceEmbeddingStore(vectors, dim)


def write_dataset_files(questions, questions_path, contexts_path) -> None:
    """Write records in the two-file line-delimited dataset layout.

    Passage order is preserved; the loader resynthesizes the same
    "<uid>-pNNN" identifiers from that order.
    """
    with open(questions_path, "w", encoding="utf-8") as fh:
        for q in questions:
            fh.write(
                json.dumps(
                    {"uid": q.question_id, "question": q.question_text, "answer": q.gold_answers}
                )
                + "\n"
            )
    with open(contexts_path, "w", encoding="utf-8") as fh:
        for q in questions:
            contexts = [[float(len(q.passages) - i), text] for i, (_, text) in enumerate(q.passages)]
            fh.write(json.dumps({"uid": q.question_id, "contexts": contexts}) + "\n")
