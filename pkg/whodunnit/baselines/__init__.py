"""
Baselines - PRO pronoun rule, per-sentence MLP and linear-chain CRF.
"""
from whodunnit.baselines.crf import (
    CrfTagger,
    backward_log_partition,
    crf_decode,
    crf_loglik_and_grads,
    crf_marginals,
    forward_log_partition,
    sequence_score,
    unary_scores,
)
from whodunnit.baselines.mlp import MlpTagger, mlp_predict
from whodunnit.baselines.pro import DEFAULT_LEXICON, load_lexicon, pro_label, pro_predict


__all__ = [
    "CrfTagger",
    "DEFAULT_LEXICON",
    "MlpTagger",
    "backward_log_partition",
    "crf_decode",
    "crf_loglik_and_grads",
    "crf_marginals",
    "forward_log_partition",
    "load_lexicon",
    "mlp_predict",
    "pro_label",
    "pro_predict",
    "sequence_score",
    "unary_scores",
]
