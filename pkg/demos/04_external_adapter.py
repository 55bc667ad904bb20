"""Auditing a model you don't control, via the subprocess adapter.

Any executable that speaks the line-delimited JSON protocol can serve as
a decision maker or group classifier:

  -> {"op": "hello", "columns": [...]}      <- {"ok": true}
  -> {"op": "predict", "rows": [[...],..]}  <- {"labels": [...], "probas": [...]}
  -> {"op": "bye"}

This demo trains a built-in logistic regression, saves it, writes a tiny
server script that loads it, and talks to that server over the protocol.

Run: python3 demos/04_external_adapter.py
"""

import sys
import tempfile
import textwrap
from pathlib import Path

import numpy as np

from cfaudit.data import EncodedMatrix
from cfaudit.models import ExternalModel, fit, save_handle

rng = np.random.default_rng(0)
X = rng.normal(size=(300, 3))
y = (X[:, 0] - X[:, 2] > 0).astype(int)
names = ("f0", "f1", "f2")
handle = fit(
    "logistic-regression", {},
    EncodedMatrix(X, tuple((n, None) for n in names), None), y, seed=0,
)

workdir = Path(tempfile.mkdtemp())
model_path = workdir / "model.json"
save_handle(handle, str(model_path))

server = workdir / "serve.py"
server.write_text(textwrap.dedent(f"""
    import json, sys
    import numpy as np
    from cfaudit.models import load_handle

    handle = load_handle({str(model_path)!r})
    for line in sys.stdin:
        msg = json.loads(line)
        if msg["op"] == "hello":
            print(json.dumps({{"ok": True}}), flush=True)
        elif msg["op"] == "bye":
            break
        else:
            rows = np.asarray(msg["rows"], dtype=float)
            print(json.dumps({{"labels": handle.predict(rows).tolist(),
                               "probas": handle.predict_proba(rows).tolist()}}),
                  flush=True)
"""))

probe = rng.normal(size=(5, 3))
with ExternalModel([sys.executable, str(server)], list(names)) as ext:
    labels, probas = ext.predict_batch(probe)

print("served predictions over the adapter protocol:")
for row, lab, p in zip(probe, labels, probas):
    print(f"  {np.round(row, 2).tolist()} -> label={lab} proba={p:.3f}")

print("\nsame model, in-process, for comparison:")
print(f"  labels match: {np.array_equal(labels, handle.predict(probe))}")
print(f"  probas match: {np.allclose(probas, handle.predict_proba(probe))}")
