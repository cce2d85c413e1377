"""
Constants of the synthetic episode generator.
"""

CHANNELS = ("text", "visual", "audio")

MARKER_TOKEN = "culprit"
TRIGGER_TOKEN = "fingerprint"
FILLER_PREFIX = "w"

CHARACTER_NAMES = (
    "archie", "beatrix", "cassius", "delphine", "edmund", "fiona", "gideon", "harriet",
    "ignatius", "juniper", "kendrick", "lorelei", "marcus", "nadia", "oswald", "priscilla",
    "quentin", "rosalind", "silas", "theodora", "ulric", "vivian", "wallace", "xenia",
    "yorick", "zelda", "ambrose", "bianca", "cornelius", "dorothea", "elias", "florence",
)

FILLER_MIN = 4
FILLER_MAX = 10
UTTERANCE_SHARE = 0.8

# Audio: one tone burst per sentence slot
SLOT_MS = 250
TONE_MS = 200
SIGNAL_HZ = 880.0
PLAIN_HZ = 440.0
TONE_AMPLITUDE = 0.5
NOISE_STD = 0.01

EMBEDDING_SCALE = 0.5

DATASET_FILES = {
    "corpus": "corpus.jsonl",
    "cases": "cases.jsonl",
    "embeddings": "embeddings.txt",
    "synth": "synth.json",
    "audio_dir": "audio",
    "visual_dir": "visual",
}
