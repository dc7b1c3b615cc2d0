import os

# All outputs land under this root unless a command is given an explicit directory.
OUTPUT_ROOT = os.environ.get("GLN_OUTPUT_ROOT", os.path.join(os.getcwd(), "output"))

# Folders created under whichever root a run resolves to.
DATA_SUBDIR = "data"
RUNS_SUBDIR = "runs"
