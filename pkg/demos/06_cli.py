"""
Running experiments from config files
=====================================

The ``wignerlab`` command takes a JSON config and writes a long-format CSV
with a ``.meta.json`` sidecar.  This script writes a config, runs it
through the same entry point the console script uses, and reruns it from
the sidecar.
"""

import json
import pathlib
import tempfile

from wignerlab.cli import main, run

work = pathlib.Path(tempfile.mkdtemp())
config = {
    "ensemble": {"N": 100, "label": "GUE", "entry": {"kind": "complex-gaussian"}},
    "E": 0.0,
    "observable": {"k": 2, "half_width": 3.0},
    "M": 100,
    "seed": 3,
}
(work / "correlate.json").write_text(json.dumps(config, indent=2))

# equivalent to: wignerlab correlate correlate.json -o out.csv --workers 1
status = main(["correlate", str(work / "correlate.json"), "-o", str(work / "out.csv"), "--workers", "1"])
print("exit status", status)
print((work / "out.csv").read_text())

meta = json.loads((work / "out.csv.meta.json").read_text())
print("sidecar keys:", sorted(meta))
run(meta["command"], meta["effective_config"], {"output": str(work / "again.csv")})
print("rerun identical:", (work / "out.csv").read_bytes() == (work / "again.csv").read_bytes())
