"""
Running experiments from the command line
=========================================

The same entry point as the ``ustlab`` console script, driven in-process.
Each run writes a JSON summary and, where there are rows, a CSV whose first
two lines record the configuration and build.
"""
import json
import tempfile
from pathlib import Path

from ustlab.cli import main

out = Path(tempfile.mkdtemp())
main(["count-st", "--rows", "3", "--cols", "3", "--out", str(out)])
main(["gen", "--side", "16", "--seed", "5", "--out", str(out)])
main(["range", "--tree", str(out / "tree.ust"), "--steps", "100,1000", "--seed", "5",
      "--out", str(out)])
main(["lerw-exponent", "--rmax", "32", "--samples", "100", "--seed", "1", "--out", str(out)])

summary = json.loads((out / "lerw-exponent.json").read_text())
print({k: summary[k] for k in ("estimate", "stderr", "n_samples", "build")})
print("\n".join((out / "lerw-exponent.csv").read_text().splitlines()[:4]))
# a randomized run without a seed is a usage error
print("exit status without --seed:", main(["walk-dw", "--out", str(out)]))
