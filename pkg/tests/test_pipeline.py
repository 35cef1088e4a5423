import math

import numpy as np
import pytest

from passagerank.data import QuestionRecord
from passagerank.pipeline import (
    AnswerDecision,
    ReaderOutput,
    combine_answer_scores,
    exact_match,
    f1_score,
    load_decisions,
    load_reader_outputs,
    recall_at_k,
    save_decisions,
    save_reader_outputs,
    softmax_top_k,
)
from passagerank.rankers import RankedList, ScoredPassage


def ranked(qid, *pairs):
    entries = [
        ScoredPassage(pid, score, scorable=not (isinstance(score, float) and math.isnan(score)))
        for pid, score in pairs
    ]
    return RankedList(qid, entries)


class TestSoftmaxTopK:
    def test_equal_scores_uniform(self):
        r = ranked("q", *[(f"p{i}", 1.5) for i in range(5)])
        probs = softmax_top_k(r, 5)
        assert [p for _, p in probs] == pytest.approx([0.2] * 5)

    def test_single_passage(self):
        probs = softmax_top_k(ranked("q", ("p0", -3.0)), 5)
        assert probs == [("p0", 1.0)]

    def test_hand_softmax(self):
        probs = softmax_top_k(ranked("q", ("a", 2.0), ("b", 1.0), ("c", 0.0)), 3)
        expected = np.exp([0.0, -1.0, -2.0])
        expected /= expected.sum()
        for (_, p), e in zip(probs, expected):
            assert p == pytest.approx(e, abs=1e-4)
        assert probs[0][1] == pytest.approx(0.6652, abs=1e-4)
        assert probs[1][1] == pytest.approx(0.2447, abs=1e-4)
        assert probs[2][1] == pytest.approx(0.0900, abs=1e-4)

    def test_takes_at_most_k(self):
        r = ranked("q", *[(f"p{i}", float(-i)) for i in range(10)])
        probs = softmax_top_k(r, 3)
        assert [pid for pid, _ in probs] == ["p0", "p1", "p2"]

    def test_sums_to_one_and_positive(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            scores = rng.normal(scale=5.0, size=int(rng.integers(1, 8)))
            r = ranked("q", *[(f"p{i}", float(s)) for i, s in enumerate(scores)])
            probs = softmax_top_k(r, 5)
            values = [p for _, p in probs]
            assert abs(sum(values) - 1.0) < 1e-12
            assert all(v > 0 for v in values)

    def test_shift_invariance_exact(self):
        # dyadic scores and shifts add without rounding, so the shifted
        # differences (and hence the probabilities) are bit-identical
        rng = np.random.default_rng(1)
        scores = rng.integers(-512, 512, size=5) / 64.0
        for shift in (-100.0, 0.5, 1024.0):
            a = softmax_top_k(ranked("q", *[(f"p{i}", float(s)) for i, s in enumerate(scores)]), 5)
            b = softmax_top_k(
                ranked("q", *[(f"p{i}", float(s + shift)) for i, s in enumerate(scores)]), 5
            )
            assert [p for _, p in a] == [p for _, p in b]

    def test_overflow_safe(self):
        probs = softmax_top_k(ranked("q", ("a", 1e4), ("b", 9e3)), 2)
        assert probs[0][1] == pytest.approx(1.0)

    def test_skips_unscorable(self):
        r = ranked("q", ("a", 1.0), ("b", float("nan")), ("c", 0.0))
        probs = softmax_top_k(r, 3)
        assert [pid for pid, _ in probs] == ["a", "c"]


class TestCombineAnswerScores:
    def test_single_candidate(self):
        decision = combine_answer_scores(
            "q", [("p0", 1.0)], [ReaderOutput("q", "p0", [("ecuador", 0.9)])]
        )
        assert decision.chosen_answer == "ecuador"
        assert decision.confidence == pytest.approx(0.9)
        assert decision.chosen_passage_id == "p0"

    def test_product_rule_prefers_stronger_joint(self):
        decision = combine_answer_scores(
            "q",
            [("p1", 0.6), ("p2", 0.4)],
            [
                ReaderOutput("q", "p1", [("a", 0.5)]),
                ReaderOutput("q", "p2", [("b", 0.8)]),
            ],
        )
        assert decision.chosen_answer == "b"
        assert decision.confidence == pytest.approx(0.32)

    def test_tie_goes_to_higher_ranked_passage(self):
        decision = combine_answer_scores(
            "q",
            [("p1", 0.5), ("p2", 0.5)],
            [
                ReaderOutput("q", "p1", [("late", 0.4)]),
                ReaderOutput("q", "p2", [("early", 0.4)]),
            ],
        )
        assert decision.chosen_passage_id == "p1"
        assert decision.chosen_answer == "late"

    def test_tie_on_same_passage_lexicographic(self):
        decision = combine_answer_scores(
            "q", [("p1", 1.0)], [ReaderOutput("q", "p1", [("zebra", 0.4), ("apple", 0.4)])]
        )
        assert decision.chosen_answer == "apple"

    def test_missing_reader_outputs_error(self):
        with pytest.raises(ValueError, match="q7"):
            combine_answer_scores("q7", [("p1", 1.0)], [])

    def test_partial_coverage_allowed(self):
        decision = combine_answer_scores(
            "q",
            [("p1", 0.7), ("p2", 0.3)],
            [ReaderOutput("q", "p2", [("only", 0.5)])],
        )
        assert decision.chosen_answer == "only"

    def test_confidence_bounded_by_max_passage_probability(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            n = int(rng.integers(1, 5))
            raw = rng.uniform(0.1, 1.0, size=n)
            probs = [(f"p{i}", float(v / raw.sum())) for i, v in enumerate(raw)]
            outputs = [
                ReaderOutput("q", f"p{i}", [(f"ans{i}", float(rng.uniform(0, 1)))])
                for i in range(n)
            ]
            decision = combine_answer_scores("q", probs, outputs)
            assert decision.confidence <= max(p for _, p in probs) + 1e-12


def fixture_questions():
    # answers planted at ranks 1, 3, and 7 of the respective ranked lists
    questions = []
    ranked_lists = []
    plant = {0: 0, 1: 2, 2: 6}
    for qi in range(3):
        qid = f"q{qi}"
        passages = []
        for pj in range(8):
            pid = f"{qid}-p{pj:03d}"
            text = "quito is the answer here" if pj == plant[qi] else "nothing to see"
            passages.append((pid, text))
        questions.append(QuestionRecord(qid, "which capital", ["Quito"], passages))
        ranked_lists.append(
            RankedList(qid, [ScoredPassage(pid, float(-pj)) for pj, (pid, _) in enumerate(passages)])
        )
    return questions, ranked_lists


class TestRecallAtK:
    def test_three_question_fixture(self):
        questions, ranked_lists = fixture_questions()
        by_id = {q.question_id: q for q in questions}
        assert recall_at_k(ranked_lists, by_id, 1) == pytest.approx(1 / 3)
        assert recall_at_k(ranked_lists, by_id, 3) == pytest.approx(2 / 3)
        assert recall_at_k(ranked_lists, by_id, 5) == pytest.approx(2 / 3)
        assert recall_at_k(ranked_lists, by_id, 7) == pytest.approx(1.0)

    def test_nondecreasing_in_k(self):
        questions, ranked_lists = fixture_questions()
        by_id = {q.question_id: q for q in questions}
        values = [recall_at_k(ranked_lists, by_id, k) for k in range(1, 9)]
        assert values == sorted(values)

    def test_perfect_when_rank_one_hits(self):
        questions, _ = fixture_questions()
        by_id = {q.question_id: q for q in questions}
        lists = []
        for q in questions:
            hit = next(pid for pid, text in q.passages if "quito" in text)
            rest = [pid for pid, _ in q.passages if pid != hit]
            entries = [ScoredPassage(hit, 1.0)] + [ScoredPassage(p, 0.0) for p in rest]
            lists.append(RankedList(q.question_id, entries))
        assert recall_at_k(lists, by_id, 1) == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            recall_at_k([], {}, 1)


class TestExactMatch:
    def test_case_normalization(self):
        assert exact_match("Ecuador", ["ecuador"]) == 1

    def test_article_removal(self):
        assert exact_match("The Ecuador", ["Ecuador"]) == 1

    def test_mismatch(self):
        assert exact_match("Peru", ["Ecuador"]) == 0

    def test_any_gold(self):
        assert exact_match("quito", ["Guayaquil", "Quito"]) == 1

    def test_requires_golds(self):
        with pytest.raises(ValueError):
            exact_match("x", [])


class TestF1:
    def test_exact_prediction(self):
        assert f1_score("republic of ecuador", ["republic of ecuador"]) == 1.0

    def test_normalization_collapses_articles(self):
        assert f1_score("the equator", ["equator"]) == 1.0

    def test_partial_overlap(self):
        assert f1_score("republic of ecuador", ["ecuador"]) == pytest.approx(0.5)

    def test_no_overlap(self):
        assert f1_score("peru", ["ecuador"]) == 0.0

    def test_empty_prediction_vs_nonempty_gold(self):
        assert f1_score("", ["ecuador"]) == 0.0

    def test_both_empty_after_normalization(self):
        assert f1_score("the", ["a"]) == 1.0

    def test_max_over_golds(self):
        assert f1_score("quito", ["Guayaquil", "Quito city"]) == pytest.approx(2 / 3)

    def test_exact_match_implies_f1_one(self):
        rng = np.random.default_rng(3)
        words = ["quito", "the", "peru", "lima", "a", "republic"]
        for _ in range(100):
            pred = " ".join(words[i] for i in rng.integers(0, len(words), size=3))
            golds = [" ".join(words[i] for i in rng.integers(0, len(words), size=3))]
            if exact_match(pred, golds) == 1:
                assert f1_score(pred, golds) == 1.0


class TestInterchangeFiles:
    def test_reader_outputs_round_trip(self, tmp_path):
        outputs = [
            ReaderOutput("q0", "p0", [("ecuador", 0.75), ("peru", 0.1)]),
            ReaderOutput("q1", "p3", [("quito", 1.0)]),
        ]
        path = tmp_path / "reader.jsonl"
        save_reader_outputs(path, outputs)
        loaded = load_reader_outputs(path)
        assert loaded == outputs

    def test_reader_outputs_malformed_line(self, tmp_path):
        path = tmp_path / "reader.jsonl"
        path.write_text('{"question_id": "q0"}\n')
        with pytest.raises(ValueError, match="reader.jsonl:1"):
            load_reader_outputs(path)

    def test_probability_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            ReaderOutput("q", "p", [("x", 1.5)])

    def test_decisions_round_trip(self, tmp_path):
        decisions = [AnswerDecision("q0", "quito", "p2", 0.375)]
        path = tmp_path / "decisions.jsonl"
        save_decisions(path, decisions)
        assert load_decisions(path) == decisions
