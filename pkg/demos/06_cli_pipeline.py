"""The command line end to end, driven from Python.

Equivalent shell session::

    logfluct synth --family qgaussian --q 1.72 --B 5.9 --n 13865 --seed 1 -o synth.csv
    logfluct analyze --input synth.csv --analyses all --seed 7 --out-dir out
    logfluct defaults
"""

import json
import tempfile
from pathlib import Path

from logfluct.cli import main

with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    series = tmp / "synth.csv"
    main(["synth", "--family", "qgaussian", "--q", "1.72", "--B", "5.9", "--n", "13865", "--seed", "1",
          "-o", str(series)])
    code = main(["analyze", "--input", str(series), "--analyses", "all", "--seed", "7", "--out-dir", str(tmp / "out")])
    print("exit code", code)
    print("files:", sorted(p.name for p in (tmp / "out").iterdir()))

    report = json.loads((tmp / "out" / "report.json").read_text())
    a = report["analyses"]
    print(f"q = {a['pdf']['fit']['params']['q']:.3f}, attractor {a['pdf']['attractor']}")
    print(f"collapse alpha {a['collapse']['alpha']:.3f} ({a['collapse']['alpha_source']}), "
          f"pooled tail slope {a['collapse']['pooled']['slope']:.2f}")
    print(f"DFA H of |r| {a['dfa']['H_all']['params']['H']:.3f}, shuffled {a['dfa']['H_shuffled']['params']['H']:.3f}")
    print(f"leverage antisymmetric: {a['leverage']['antisymmetric']}")
    print("parameters recorded:", ", ".join(sorted(report["parameters"])))
