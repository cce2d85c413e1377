"""
Constants for acoustic, visual and textual feature extraction.
"""

SAMPLE_RATE = 16000
WINDOW_MS = 25.0
HOP_MS = 5.0
N_FFT = 512
N_MEL_FILTERS = 26
N_MFCC = 13
PRE_EMPHASIS = 0.97
LOG_FLOOR = 1e-10

# MFCC frames sampled per sentence, at fractions k/6 (k = 1..5) of its interval
FRAMES_PER_SENTENCE = 5

VISUAL_DIM = 1536
ACOUSTIC_DIM = FRAMES_PER_SENTENCE * N_MFCC

EMBEDDING_DIM = 50
PAD_ID = 0
UNK_ID = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
MAX_TOKENS = 60

# Feature cache container
CACHE_MAGIC = b"WDF1"
