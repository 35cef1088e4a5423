"""Dataset ingestion and the ranked-list file format.

The dataset mirrors the public QUASAR-T layout: a questions file and a
contexts file, both line-delimited JSON. A question line holds
{"uid": ..., "question": ..., "answer": ...} (answer may be a string or a
list of strings); a context line holds {"uid": ..., "contexts": [[score,
text], ...]} with passages in search-engine order. Passage identifiers are
synthesized as "<uid>-p000", "<uid>-p001", ... in that order, so they are
unique across the whole split and can key sentence-embedding stores.

A ranked-list file has one line per question: the question id, then one
tab-separated "passage_id score" field per passage in rank order, scores
rendered with full precision (repr) so files are byte-reproducible and
round-trip exactly. Unscorable passages carry the score "nan".
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Sequence

from .rankers import RankedList, ScoredPassage

log = logging.getLogger(__name__)


@dataclass
class QuestionRecord:
    question_id: str
    question_text: str
    gold_answers: list[str]
    passages: list[tuple[str, str]]

    def __post_init__(self):
        if not self.gold_answers:
            raise ValueError(f"question {self.question_id!r} has no gold answers")
        ids = [pid for pid, _ in self.passages]
        if len(ids) != len(set(ids)):
            raise ValueError(f"question {self.question_id!r} has duplicate passage ids")

    def passage_text(self, passage_id: str) -> str:
        for pid, text in self.passages:
            if pid == passage_id:
                return text
        raise KeyError(f"question {self.question_id!r} has no passage {passage_id!r}")


def _parse_line(path, lineno: int, line: str) -> dict:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}:{lineno}: malformed JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ValueError(f"{path}:{lineno}: expected a JSON object")
    return obj


def load_dataset(questions_path, contexts_path) -> tuple[list[QuestionRecord], int]:
    """Join question and context files on the question uid.

    Returns the joined records plus the number of questions dropped for
    lacking contexts (also logged as a warning).
    """
    contexts: dict[str, list[tuple[str, str]]] = {}
    with open(contexts_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = _parse_line(contexts_path, lineno, line)
            try:
                uid = obj["uid"]
                raw = obj["contexts"]
            except KeyError as exc:
                raise ValueError(f"{contexts_path}:{lineno}: missing field {exc}") from exc
            if uid in contexts:
                raise ValueError(f"{contexts_path}:{lineno}: duplicate context uid {uid!r}")
            passages = []
            for i, entry in enumerate(raw):
                if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
                    raise ValueError(
                        f"{contexts_path}:{lineno}: context entry {i} is not a [score, text] pair"
                    )
                passages.append((f"{uid}-p{i:03d}", str(entry[1])))
            contexts[uid] = passages

    records: list[QuestionRecord] = []
    seen: set[str] = set()
    dropped = 0
    with open(questions_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            obj = _parse_line(questions_path, lineno, line)
            try:
                uid = obj["uid"]
                question_text = obj["question"]
                answer = obj["answer"]
            except KeyError as exc:
                raise ValueError(f"{questions_path}:{lineno}: missing field {exc}") from exc
            if uid in seen:
                raise ValueError(f"{questions_path}:{lineno}: duplicate question uid {uid!r}")
            seen.add(uid)
            answers = [answer] if isinstance(answer, str) else [str(a) for a in answer]
            if not answers or any(not a for a in answers):
                raise ValueError(f"{questions_path}:{lineno}: empty answer for {uid!r}")
            passages = contexts.get(uid)
            if not passages:
                dropped += 1
                continue
            records.append(QuestionRecord(uid, question_text, answers, passages))
    if dropped:
        log.warning("dropped %d question(s) lacking contexts", dropped)
    return records, dropped


def save_ranked_lists(path, ranked_lists: Sequence[RankedList]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ranked in ranked_lists:
            fields = [ranked.question_id]
            fields += [f"{e.passage_id} {repr(e.score)}" for e in ranked.entries]
            fh.write("\t".join(fields) + "\n")


def load_ranked_lists(path) -> list[RankedList]:
    ranked_lists = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) < 2:
                raise ValueError(f"{path}:{lineno}: expected a question id and passages")
            entries = []
            for item in fields[1:]:
                try:
                    passage_id, score_text = item.rsplit(" ", 1)
                    score = float(score_text)
                except ValueError as exc:
                    raise ValueError(f"{path}:{lineno}: bad passage field {item!r}") from exc
                entries.append(ScoredPassage(passage_id, score, scorable=not math.isnan(score)))
            ranked_lists.append(RankedList(fields[0], entries))
    return ranked_lists
