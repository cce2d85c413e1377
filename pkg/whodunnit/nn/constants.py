"""
Architecture and optimizer defaults of the sequence tagger.
"""

CONV_WIDTHS = (3, 4, 5)
CONV_CHANNELS = 75
FUSION_DIM = 300
HIDDEN_DIM = 128
N_CLASSES = 2
INIT_SCALE = 0.08

LEARNING_RATE = 0.001
EPOCHS = 100
BATCH_CASES = 6
DROPOUT = 0.5
RUNS = 5
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8

# Modality letters: text, visual, acoustic
MODALITY_LETTERS = "TVA"

CHECKPOINT_MAGIC = b"WDNN"
CHECKPOINT_VERSION = 1

# Finite-difference gradient check
GRADCHECK_STEP = 1e-5
GRADCHECK_SAMPLES = 30
GRADCHECK_TOLERANCE = 1e-4
GRADCHECK_FLOOR = 1e-4
