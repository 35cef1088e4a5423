"""Text preparation: tokenization, vocabulary filtering, answer labeling.

Walks the classic equator example through the rules that decide which
passages count as positives during training.
"""

from passagerank.text import build_vocab, contains_answer, normalize_answer, tokenize

question = "Which country's name means equator?"
answers = ["Ecuador"]

passages = [
    "Ecuador : Equator in Spanish, as the country lies on the Equator.",
    "The equator crosses just north of Ecuador's capital, Quito.",
    "The country that comes closest to the equator without touching it is Peru.",
    "The name of the country is derived from its position on the Equator.",
    "The location of the Republic of Ecuador -LRB- which literally means "
    "Republic of the equator -RRB- is a representative democratic republic.",
]

print("question tokens:", tokenize(question))
print()

# token-boundary answer containment, not raw substring matching
for text in passages:
    label = "POSITIVE" if contains_answer(text, answers) else "negative"
    print(f"{label}: {text}")
print()

# the fourth passage is semantically on-topic yet has no answer string;
# it stays a negative. Normalization drives exact-match scoring too:
for raw in ("The Equator", "U.S.A.", "Ecuador's"):
    print(f"normalize_answer({raw!r}) = {normalize_answer(raw)!r}")
print()

# vocabulary filtering keeps tokens seen at least min_count times
corpus = [tokenize(text) for text in passages] * 2  # pretend a bigger corpus
vocab = build_vocab(corpus, min_count=4)
print(f"vocabulary of {vocab.size} tokens, most frequent first:")
print(vocab.tokens()[:10])
print("'equator' in vocab:", "equator" in vocab)
print("'peru' in vocab:", "peru" in vocab)
