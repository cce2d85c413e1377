"""
Synthgen - deterministic synthetic episodes for desk-scale experiments.
"""
from whodunnit.synthgen.bayes import bayes_rate
from whodunnit.synthgen.generator import (
    CaseLatents,
    SynthDataset,
    SynthRecord,
    SynthSpec,
    generate,
    load_synth_record,
    vocabulary,
    write_dataset,
)


__all__ = [
    "CaseLatents",
    "SynthDataset",
    "SynthRecord",
    "SynthSpec",
    "bayes_rate",
    "generate",
    "load_synth_record",
    "vocabulary",
    "write_dataset",
]
