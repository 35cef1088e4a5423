"""Answer selection and QA metrics.

A ranked list's top-k scores become passage probabilities via a stable
softmax; multiplying them with a machine reader's span probabilities picks
the final answer, scored by exact-match and token F1.
"""

from passagerank.pipeline import (
    ReaderOutput,
    combine_answer_scores,
    exact_match,
    f1_score,
    softmax_top_k,
)
from passagerank.rankers import RankedList, ScoredPassage

ranked = RankedList("q0", [
    ScoredPassage("q0-p002", 3.1),
    ScoredPassage("q0-p000", 2.4),
    ScoredPassage("q0-p007", 0.9),
])

probs = softmax_top_k(ranked, k=5)
print("passage probabilities from the top scores:")
for pid, p in probs:
    print(f"  {pid}: {p:.4f}")
print("sum:", sum(p for _, p in probs))
print()

# the machine reader proposes spans per passage with conditional probabilities
reader_outputs = [
    ReaderOutput("q0", "q0-p002", [("the Equator", 0.30), ("Ecuador", 0.28)]),
    ReaderOutput("q0", "q0-p000", [("Ecuador", 0.55)]),
    ReaderOutput("q0", "q0-p007", [("Peru", 0.90)]),
]

decision = combine_answer_scores("q0", probs, reader_outputs)
print(f"chosen answer: {decision.chosen_answer!r} from {decision.chosen_passage_id}")
print(f"confidence P(p) * P(a|p) = {decision.confidence:.4f}")
print()

# even though "Peru" has the highest conditional probability, its passage is
# ranked too low for the product to win.

golds = ["Ecuador"]
for prediction in ("Ecuador", "the Ecuador", "Republic of Ecuador", "Peru"):
    print(f"prediction {prediction!r}: EM={exact_match(prediction, golds)} "
          f"F1={f1_score(prediction, golds):.3f}")
