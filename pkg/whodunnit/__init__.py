__version__ = "0.1.0"

from whodunnit.errors import WhodunnitError  # noqa: E402
from whodunnit.evaluation import prf_minority, summarize_runs  # noqa: E402
from whodunnit.nn import LstmTagger, ModelConfig, TrainConfig, predict_sequence, train  # noqa: E402
from whodunnit.synthgen import SynthSpec, bayes_rate, generate  # noqa: E402

__all__ = [
    "__version__",
    "LstmTagger",
    "ModelConfig",
    "SynthSpec",
    "TrainConfig",
    "WhodunnitError",
    "bayes_rate",
    "generate",
    "predict_sequence",
    "prf_minority",
    "summarize_runs",
    "train",
]
