"""
Neural core - convolutional sentence encoder, modality fusion, LSTM, ADAM training.
"""
from whodunnit.nn.adam import AdamMoments, adam_step
from whodunnit.nn.checkpoint import checkpoint_bytes, load_checkpoint, save_checkpoint
from whodunnit.nn.config import (
    Modalities,
    ModelConfig,
    TrainConfig,
    model_config_from_dict,
    model_config_to_dict,
)
from whodunnit.nn.gradcheck import gradient_check
from whodunnit.nn.layers import LstmState, encode_sentences, fuse, lstm_step
from whodunnit.nn.model import FrontEndTagger, LstmTagger, Tagger, decide, predict_sequence
from whodunnit.nn.params import TensorSet
from whodunnit.nn.train import EpochRecord, RunResult, TrainResult, train, write_epoch_log


__all__ = [
    "AdamMoments",
    "EpochRecord",
    "FrontEndTagger",
    "LstmState",
    "LstmTagger",
    "Modalities",
    "ModelConfig",
    "RunResult",
    "Tagger",
    "TensorSet",
    "TrainConfig",
    "TrainResult",
    "adam_step",
    "checkpoint_bytes",
    "decide",
    "encode_sentences",
    "fuse",
    "gradient_check",
    "load_checkpoint",
    "lstm_step",
    "model_config_from_dict",
    "model_config_to_dict",
    "predict_sequence",
    "save_checkpoint",
    "train",
    "write_epoch_log",
]
