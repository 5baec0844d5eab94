"""Features-matrix prompt regularization at desk scale.

Builds a frozen template x class grid of text features, selects hard
positive/negative entries per training sample by cosine score, and tunes a
linear visual adapter plus per-class text features on a combined
cross-entropy + contrastive objective with verified analytic gradients.
"""

from .encoders import EncoderInterface, StoreEncoder, SyntheticEncoder, SyntheticWorld, synthetic_generate
from .evaluation import evaluate_base_to_novel, harmonic_mean, predict, zero_shot_classifier
from .features import (
    FeaturesMatrix,
    UnexpectedSelection,
    build_features_matrix,
    compute_score_matrix,
    features_from_store,
    select_unexpected,
)
from .objective import LossBreakdown, contrastive_loss, cross_entropy_loss, finite_difference_check, total_loss
from .prompts import ClassVocabulary, PromptTemplate, TemplateBank, default_bank, render_prompt, split_base_novel
from .store import EmbeddingStore, store_read, store_write
from .trainer import AdapterState, TrainConfig, TrainReport, sample_few_shot, train
from .vecmath import cosine, l2_normalize, softmax

__all__ = [
    "AdapterState", "ClassVocabulary", "EmbeddingStore", "EncoderInterface",
    "FeaturesMatrix", "LossBreakdown", "PromptTemplate", "StoreEncoder",
    "SyntheticEncoder", "SyntheticWorld", "TemplateBank", "TrainConfig",
    "TrainReport", "UnexpectedSelection", "build_features_matrix",
    "compute_score_matrix", "contrastive_loss", "cosine", "cross_entropy_loss",
    "default_bank", "evaluate_base_to_novel", "features_from_store",
    "finite_difference_check", "harmonic_mean", "l2_normalize", "predict",
    "render_prompt", "sample_few_shot", "select_unexpected", "softmax",
    "split_base_novel", "store_read", "store_write", "synthetic_generate",
    "total_loss", "train", "zero_shot_classifier",
]
