"""Command-line surface tying ingestion, training, ranking, selection, and
evaluation together.

Commands: train, rank, select-answer, eval-recall, eval-qa, inspect.
Configuration lives in a JSON file (--config); the flags --model, --split,
--k, --seed, --checkpoint, and --out override it. Relative paths resolve
against $PASSAGERANK_DATA_DIR when it is set. Errors exit nonzero with a
one-line "<category>: <detail>" message on stderr (config-error 2,
data-error 3, runtime-error 4).
"""

from __future__ import annotations

import argparse
import copy
import json
import os
import sys
from pathlib import Path

from . import pipeline
from .data import QuestionRecord, load_dataset, load_ranked_lists, save_ranked_lists
from .embeddings import Resources, load_sentence_embeddings, load_word_embeddings
from .rankers import AllUnscorableError, load_ranker, make_ranker, rank_passages
from .text import Vocabulary, build_vocab, contains_answer, tokenize
from .training import TrainingConfig, train

RECALL_KS = (1, 3, 5)

EXIT_CODES = {"config-error": 2, "data-error": 3, "runtime-error": 4}

DEFAULT_CONFIG = {
    "model": "infersent",
    "seed": 0,
    "selection_k": 5,
    "splits": {},
    "word_embeddings": None,
    "sentence_embeddings": None,
    "vocab": None,
    "checkpoint": None,
    "ranked": None,
    "reader_outputs": None,
    "decisions": None,
    "report": None,
    "log": None,
    "training": {
        "learning_rate": 0.001,
        "dropout_p": 0.5,
        "k_negatives": 5,
        "margin": 1.0,
        "max_steps": None,
        "max_epochs": 10,
        "eval_every": None,
        "patience": 3,
    },
    "scorer": {
        "hidden_units": 500,
        "g_units": [300, 300, 5],
        "f_units": [5, 5, 1],
        "max_passage_tokens": 100,
        "min_count": 5,
    },
}


class CliError(Exception):
    def __init__(self, category: str, message: str):
        super().__init__(message)
        self.category = category


def _deep_merge(base: dict, override: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _load_config(args) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if args.config:
        path = _resolve(args.config)
        if not path.exists():
            raise CliError("config-error", f"config file not found: {path}")
        try:
            with open(path, encoding="utf-8") as fh:
                cfg = _deep_merge(cfg, json.load(fh))
        except json.JSONDecodeError as exc:
            raise CliError("config-error", f"config file {path} is not valid JSON: {exc}")
    for key in ("model", "seed", "checkpoint"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if getattr(args, "k", None) is not None:
        cfg["selection_k"] = args.k
    if cfg["model"] not in ("infersent", "rn"):
        raise CliError("config-error", f"unknown model {cfg['model']!r}")
    return cfg


def _resolve(path_str: str) -> Path:
    path = Path(path_str)
    base = os.environ.get("PASSAGERANK_DATA_DIR")
    if base and not path.is_absolute():
        return Path(base) / path
    return path


def _input_path(cfg_value, what: str) -> Path:
    if not cfg_value:
        raise CliError("config-error", f"no path configured for {what}")
    path = _resolve(cfg_value)
    if not path.exists():
        raise CliError("config-error", f"{what} path does not exist: {path}")
    return path


def _output_path(args, cfg_value, what: str) -> Path:
    value = getattr(args, "out", None) or cfg_value
    if not value:
        raise CliError("config-error", f"no output path configured for {what}")
    return _resolve(value)


def _load_split(cfg: dict, split: str) -> list[QuestionRecord]:
    splits = cfg.get("splits") or {}
    if split not in splits:
        raise CliError("config-error", f"split {split!r} not defined in config")
    entry = splits[split]
    questions = _input_path(entry.get("questions"), f"{split} questions")
    contexts = _input_path(entry.get("contexts"), f"{split} contexts")
    try:
        records, _ = load_dataset(questions, contexts)
    except ValueError as exc:
        raise CliError("data-error", str(exc))
    if not records:
        raise CliError("data-error", f"split {split!r} is empty")
    return records


def _load_resources(cfg: dict, model: str, vocab_required: bool = True) -> Resources:
    try:
        if model == "rn":
            table = load_word_embeddings(_input_path(cfg["word_embeddings"], "word embeddings"))
            vocab = None
            if cfg.get("vocab"):
                vocab = Vocabulary.load(_input_path(cfg["vocab"], "vocabulary"))
            elif vocab_required:
                raise CliError("config-error", "no vocabulary path configured")
            return Resources(word_table=table, vocab=vocab)
        store = load_sentence_embeddings(
            _input_path(cfg["sentence_embeddings"], "sentence embeddings")
        )
        return Resources(sentence_store=store)
    except ValueError as exc:
        raise CliError("data-error", str(exc))


def _training_config(cfg: dict) -> TrainingConfig:
    t = cfg["training"]
    return TrainingConfig(
        learning_rate=t["learning_rate"],
        dropout_p=t["dropout_p"],
        k_negatives=t["k_negatives"],
        margin=t["margin"],
        max_steps=t["max_steps"],
        max_epochs=t["max_epochs"],
        eval_every=t["eval_every"],
        patience=t["patience"],
        seed=cfg["seed"],
    )


def cmd_train(args) -> int:
    cfg = _load_config(args)
    model = cfg["model"]
    train_questions = _load_split(cfg, args.split or "train")
    training_cfg = _training_config(cfg)
    scorer_cfg = cfg["scorer"]

    dev_questions = None
    if training_cfg.eval_every and "dev" in (cfg.get("splits") or {}):
        dev_questions = _load_split(cfg, "dev")

    if model == "rn":
        table = load_word_embeddings(_input_path(cfg["word_embeddings"], "word embeddings"))
        corpus = []
        for q in train_questions:
            corpus.append(tokenize(q.question_text))
            corpus.extend(tokenize(text) for _, text in q.passages)
        vocab = build_vocab(corpus, scorer_cfg["min_count"])
        if cfg.get("vocab"):
            vocab.save(_resolve(cfg["vocab"]))
        resources = Resources(word_table=table, vocab=vocab)
        ranker = make_ranker(
            "rn",
            embed_dim=table.dimension,
            dropout_p=training_cfg.dropout_p,
            seed=cfg["seed"],
            g_units=tuple(scorer_cfg["g_units"]),
            f_units=tuple(scorer_cfg["f_units"]),
            max_passage_tokens=scorer_cfg["max_passage_tokens"],
        )
    else:
        store = load_sentence_embeddings(
            _input_path(cfg["sentence_embeddings"], "sentence embeddings")
        )
        if store.dimension == 0:
            raise CliError("data-error", "sentence-embedding store is empty")
        resources = Resources(sentence_store=store)
        ranker = make_ranker(
            "infersent",
            embed_dim=store.dimension,
            dropout_p=training_cfg.dropout_p,
            seed=cfg["seed"],
            hidden_units=scorer_cfg["hidden_units"],
        )

    checkpoint_path = cfg.get("checkpoint")
    if not checkpoint_path:
        raise CliError("config-error", "no checkpoint output path configured")
    log_path = _resolve(cfg["log"]) if cfg.get("log") else None

    try:
        result = train(
            ranker, train_questions, resources, training_cfg,
            dev_questions=dev_questions, log_path=log_path,
        )
    except ValueError as exc:
        raise CliError("runtime-error", str(exc))

    from .rankers import save_ranker

    save_ranker(_resolve(checkpoint_path), ranker, cfg["seed"], result.adam_states)
    last_loss = next((r["loss"] for r in reversed(result.log) if "loss" in r), None)
    summary = f"trained {result.steps} step(s)"
    if last_loss is not None:
        summary += f", final loss {last_loss:.6g}"
    if result.best_dev_recall is not None:
        summary += f", best dev recall@1 {result.best_dev_recall:.4f}"
    print(summary)
    return 0


def cmd_rank(args) -> int:
    cfg = _load_config(args)
    checkpoint = _input_path(cfg.get("checkpoint"), "checkpoint")
    try:
        ranker, _ = load_ranker(checkpoint)
    except ValueError as exc:
        raise CliError("data-error", str(exc))
    resources = _load_resources(cfg, ranker.kind)
    questions = _load_split(cfg, args.split or "test")
    out = _output_path(args, cfg.get("ranked"), "ranked lists")
    ranked_lists = []
    try:
        for question in questions:
            ranked_lists.append(rank_passages(ranker, question, resources))
    except AllUnscorableError as exc:
        raise CliError("runtime-error", str(exc))
    save_ranked_lists(out, ranked_lists)
    print(f"ranked {len(ranked_lists)} question(s) -> {out}")
    return 0


def cmd_select_answer(args) -> int:
    cfg = _load_config(args)
    ranked = load_ranked_lists(_input_path(cfg.get("ranked"), "ranked lists"))
    try:
        outputs = pipeline.load_reader_outputs(
            _input_path(cfg.get("reader_outputs"), "reader outputs")
        )
    except ValueError as exc:
        raise CliError("data-error", str(exc))
    by_question: dict[str, list] = {}
    for output in outputs:
        by_question.setdefault(output.question_id, []).append(output)
    decisions = []
    for ranked_list in ranked:
        probs = pipeline.softmax_top_k(ranked_list, cfg["selection_k"])
        try:
            decisions.append(
                pipeline.combine_answer_scores(
                    ranked_list.question_id, probs,
                    by_question.get(ranked_list.question_id, []),
                )
            )
        except ValueError as exc:
            raise CliError("runtime-error", str(exc))
    out = _output_path(args, cfg.get("decisions"), "answer decisions")
    pipeline.save_decisions(out, decisions)
    print(f"selected answers for {len(decisions)} question(s) -> {out}")
    return 0


def _write_report(args, cfg, report: dict, default_path) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    value = getattr(args, "out", None) or default_path
    if value:
        path = _resolve(value)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        print(f"report -> {path}")
    print(text)


def cmd_eval_recall(args) -> int:
    cfg = _load_config(args)
    ranked = load_ranked_lists(_input_path(cfg.get("ranked"), "ranked lists"))
    questions = _load_split(cfg, args.split or "test")
    by_id = {q.question_id: q for q in questions}
    missing = [r.question_id for r in ranked if r.question_id not in by_id]
    if missing:
        raise CliError("data-error", f"ranked question {missing[0]!r} not in split")
    report = {
        "questions": len(ranked),
        "recall": {
            str(k): pipeline.recall_at_k(ranked, by_id, k) for k in RECALL_KS
        },
    }
    _write_report(args, cfg, report, cfg.get("report"))
    return 0


def cmd_eval_qa(args) -> int:
    cfg = _load_config(args)
    decisions = pipeline.load_decisions(_input_path(cfg.get("decisions"), "answer decisions"))
    questions = _load_split(cfg, args.split or "test")
    by_id = {d.question_id: d for d in decisions}
    em_total, f1_total, decided = 0.0, 0.0, 0
    for question in questions:
        decision = by_id.get(question.question_id)
        if decision is None:
            continue
        decided += 1
        em_total += pipeline.exact_match(decision.chosen_answer, question.gold_answers)
        f1_total += pipeline.f1_score(decision.chosen_answer, question.gold_answers)
    report = {
        "questions": len(questions),
        "decided": decided,
        "exact_match": em_total / len(questions),
        "f1": f1_total / len(questions),
    }
    _write_report(args, cfg, report, cfg.get("report"))
    return 0


def cmd_inspect(args) -> int:
    cfg = _load_config(args)
    ranked = load_ranked_lists(_input_path(cfg.get("ranked"), "ranked lists"))
    questions = _load_split(cfg, args.split or "test")
    by_id = {q.question_id: q for q in questions}
    question = by_id.get(args.question_id)
    ranked_list = next((r for r in ranked if r.question_id == args.question_id), None)
    if question is None or ranked_list is None:
        raise CliError("data-error", f"question {args.question_id!r} not found")
    k = cfg["selection_k"]
    print(f"question {question.question_id}: {question.question_text}")
    print(f"gold answers: {' | '.join(question.gold_answers)}")
    for rank, entry in enumerate(ranked_list.entries[:k], start=1):
        text = question.passage_text(entry.passage_id)
        marker = " [contains answer]" if contains_answer(text, question.gold_answers) else ""
        score = "unscorable" if not entry.scorable else f"{entry.score:.6f}"
        print(f"{rank:2d}. {entry.passage_id}  score {score}{marker}")
        print(f"    {text}")
    return 0


COMMANDS = {
    "train": cmd_train,
    "rank": cmd_rank,
    "select-answer": cmd_select_answer,
    "eval-recall": cmd_eval_recall,
    "eval-qa": cmd_eval_qa,
    "inspect": cmd_inspect,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="passagerank",
        description="Neural passage re-ranking for open-domain QA",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", help="JSON configuration file")
        cmd.add_argument("--model", help="ranker kind: infersent or rn")
        cmd.add_argument("--split", help="dataset split name (default: train for train, else test)")
        cmd.add_argument("--k", type=int, help="selection / inspection cutoff")
        cmd.add_argument("--seed", type=int)
        cmd.add_argument("--checkpoint", help="checkpoint path (output of train, input of rank)")
        cmd.add_argument("--out", help="primary output path override")
        if name == "inspect":
            cmd.add_argument("question_id", help="question identifier to inspect")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"{exc.category}: {exc}", file=sys.stderr)
        return EXIT_CODES[exc.category]
    except FileNotFoundError as exc:
        print(f"config-error: {exc}", file=sys.stderr)
        return EXIT_CODES["config-error"]
    except ValueError as exc:
        print(f"data-error: {exc}", file=sys.stderr)
        return EXIT_CODES["data-error"]


if __name__ == "__main__":
    sys.exit(main())
