"""
Constants for screenplay tokenization and line classification.
"""
import re
import string

# Stripped from both ends of a token; apostrophes inside a token survive.
TOKEN_STRIP_CHARS = string.punctuation + "‘’“”…–—"

# A sentence ends at . ? or ! followed by whitespace.
SENTENCE_BOUNDARY = re.compile(r"(?<=[.?!])\s+")

SCENE_HEADING = re.compile(r"^##\s*(?P<heading>.*)$")

# NAME: dialog  (dialog may be empty, then it continues on the next line)
SPEAKER_CUE = re.compile(r"^(?P<speaker>[A-Z][A-Z0-9 .'\-]*?)\s*:\s*(?P<dialog>.*)$")

# SubRip blocks are separated by one or more blank lines
SRT_BLOCK_SEPARATOR = re.compile(r"(?:\r?\n)[ \t]*(?:\r?\n)\s*")

# Strip formatting tags such as <i>...</i> from caption text
SRT_TAGS = re.compile(r"<[^>]*>")

INTERCHANGE_FIELDS = (
    "episode_id",
    "case_id",
    "seq_index",
    "kind",
    "speaker",
    "tokens",
    "token_labels",
    "gold_label",
    "start_ms",
    "end_ms",
)
