"""
The command line
================

The same workflow through ``edumine``: generate, ingest, train, evaluate,
predict. Every output comes with a manifest.
"""

import pathlib
import tempfile

from edumine.cli import main

work = pathlib.Path(tempfile.mkdtemp())


def edumine(*args):
    print("$ edumine", " ".join(map(str, args)))
    rc = main([str(a) for a in args])
    print("exit", rc)


edumine("synth", "--n", 200, "--seed", 7, "--events", "--out", work / "s")
edumine("ingest", work / "s/events.log", work / "features.csv", "--grades", work / "s/grades.csv")
print("ingest matches generator:",
      (work / "features.csv").read_bytes() == (work / "s/expected.csv").read_bytes())

edumine("train", "--task", "regress", "--model", "rfr", "--select-k", 11,
        work / "features.csv", work / "rfr.json")
edumine("evaluate", work / "rfr.json", work / "features.csv")
edumine("predict", work / "rfr.json", work / "features.csv", work / "pred.csv")
print(*(work / "pred.csv").read_text().splitlines()[:4], sep="\n")
print((work / "rfr.json.manifest.json").read_text())
