"""Neural passage re-ranking for open-domain question answering.

Two trainable scorers order a question's candidate passages by their
likelihood of containing the answer: a feed-forward network over fixed
sentence embeddings (semantic similarity) and a relation network over all
question-word/passage-word embedding pairs (relevance matching). The package
also ships margin-ranking training, softmax paragraph selection with
reader-probability aggregation, and recall@K / exact-match / F1 evaluation.
"""

from .data import QuestionRecord, load_dataset, load_ranked_lists, save_ranked_lists
from .embeddings import (
    Resources,
    SentenceEmbeddingStore,
    WordEmbeddingTable,
    compose_paragraph_embedding,
    embed_tokens,
    load_sentence_embeddings,
    load_word_embeddings,
    split_sentences,
    write_sentence_embeddings,
)
from .nn import (
    AdamState,
    DenseLayerParams,
    MlpSpec,
    Mode,
    adam_step,
    init_adam_state,
    init_params,
    load_checkpoint,
    mlp_backward,
    mlp_forward,
    save_checkpoint,
)
from .pipeline import (
    AnswerDecision,
    ReaderOutput,
    combine_answer_scores,
    exact_match,
    f1_score,
    recall_at_k,
    softmax_top_k,
)
from .rankers import (
    AllUnscorableError,
    InferSentRanker,
    InferSentScorer,
    RankedList,
    RelationNetRanker,
    RelationNetScorer,
    ScoredPassage,
    Unscorable,
    infersent_features,
    load_ranker,
    make_ranker,
    rank_passages,
    rn_score_bruteforce,
    save_ranker,
)
from .text import (
    Vocabulary,
    build_vocab,
    contains_answer,
    normalize_answer,
    tokenize,
)
from .training import (
    TrainingConfig,
    TrainingGroup,
    TrainResult,
    margin_ranking_loss,
    partition_passages,
    sample_training_group,
    train,
)

__version__ = "0.1.0"
