"""Driving the ``fasthsic`` command from Python.

The same calls work from a shell, e.g.
``fasthsic test --x x.csv --y y.csv --method perm --perms 500 --format text``.
"""
import json
import tempfile
from pathlib import Path

import numpy as np

from fasthsic.cli import main

rng = np.random.default_rng(2)
work = Path(tempfile.mkdtemp())
x = rng.normal(size=(40, 2))
np.savetxt(work / "x.csv", x, delimiter=",")
np.savetxt(work / "y.csv", np.sin(2 * x) + 0.2 * rng.normal(size=(40, 2)), delimiter=",")

print("$ fasthsic test --x x.csv --y y.csv --format text")
main(["test", "--x", str(work / "x.csv"), "--y", str(work / "y.csv"), "--format", "text"])

print("\n$ fasthsic test --x x.csv --y y.csv --method perm --perms 499 --format csv")
main(["test", "--x", str(work / "x.csv"), "--y", str(work / "y.csv"),
      "--method", "perm", "--perms", "499", "--format", "csv"])

study = {
    "scenarios": [
        {"design": "sim2_null", "n": 30, "p": 50, "rho": 0.5},
        {"design": "sim3", "f": "cube", "m": 0, "n": 30, "k": 51},
    ],
    "methods": ["new", "gamma"],
    "runs": 200,
    "seed": 42,
}
(work / "study.json").write_text(json.dumps(study, indent=2))
print("\n$ fasthsic simulate --spec study.json --format csv")
main(["simulate", "--spec", str(work / "study.json"), "--format", "csv"])

np.savetxt(work / "short.csv", rng.normal(size=(30, 2)), delimiter=",")
print("\n$ fasthsic test --x x.csv --y short.csv", flush=True)
code = main(["test", "--x", str(work / "x.csv"), "--y", str(work / "short.csv")])
print("exit code:", code)
