"""
The file-backed pipeline
========================

``grace-acc run-all`` runs ingest, preprocess, train, evaluate and forecast,
each stage writing files the next one reads.  Here it is driven from Python
with a short training budget on two synthetic day files.
"""
from pathlib import Path

from grace_acc import ingest
from grace_acc.cli import main
from grace_acc.synthetic import synthetic_day

out = Path("demo_out")
out.mkdir(exist_ok=True)
inputs = [ingest.write_acc1b(synthetic_day(sat, seed=i), out / f"ACC1B_2005-05-30_{sat}_02.asc")
          for i, sat in enumerate("AB")]

# The same arguments work on the command line.
code = main(["run-all", "--inputs", ",".join(map(str, inputs)), "--out-dir", str(out / "run"),
             "--epochs", "5", "--jobs", "2", "--steps", "50"])
print("exit code", code)

for stage in ("ingest", "preprocess", "train", "evaluate", "forecast"):
    files = sorted(p for p in (out / "run" / stage).rglob("*") if p.is_file())
    print(f"{stage}: {len(files)} files")
print((out / "run" / "evaluate" / "rmse_scores.csv").read_text())
