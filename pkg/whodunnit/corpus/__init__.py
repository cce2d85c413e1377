"""
Corpus - screenplays, captions, interchange records and corpus statistics.
"""
from whodunnit.corpus.interchange import (
    build_cases,
    dumps_units,
    loads_units,
    read_case_index,
    read_interchange,
    write_case_index,
    write_interchange,
)
from whodunnit.corpus.screenplay import parse_screenplay, split_sentences, tokenize
from whodunnit.corpus.srt import format_srt, parse_srt
from whodunnit.corpus.stats import corpus_stats
from whodunnit.corpus.types import (
    CaptionCue,
    Case,
    CrimeType,
    SentenceKind,
    SentenceUnit,
    StatsRow,
    StatsTable,
    TokenLabel,
    case_key,
    derive_sentence_label,
)


__all__ = [
    "CaptionCue",
    "Case",
    "CrimeType",
    "SentenceKind",
    "SentenceUnit",
    "StatsRow",
    "StatsTable",
    "TokenLabel",
    "build_cases",
    "case_key",
    "corpus_stats",
    "derive_sentence_label",
    "dumps_units",
    "format_srt",
    "loads_units",
    "parse_screenplay",
    "parse_srt",
    "read_case_index",
    "read_interchange",
    "split_sentences",
    "tokenize",
    "write_case_index",
    "write_interchange",
]
