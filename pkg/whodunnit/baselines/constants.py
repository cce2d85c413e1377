"""
Constants for the comparison systems.
"""

# Personal, possessive and reflexive pronouns, lowercase
DEFAULT_PRONOUNS = (
    "i", "me", "my", "mine", "myself",
    "we", "us", "our", "ours", "ourselves",
    "you", "your", "yours", "yourself", "yourselves",
    "he", "him", "his", "himself",
    "she", "her", "hers", "herself",
    "it", "its", "itself",
    "they", "them", "their", "theirs", "themselves",
)
LEXICON_SIZE = 31

MLP_HIDDEN_DIMS = (128, 128)
MLP_LEARNING_RATE = 0.0001

CRF_TOKENS = 20
CRF_L2 = 1e-4
