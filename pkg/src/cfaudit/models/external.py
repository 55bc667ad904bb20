"""Line-delimited JSON adapter for serving third-party models over a subprocess.

Protocol, one JSON object per line on stdin/stdout:
  -> {"op": "hello", "columns": [...]}     <- {"ok": true}
  -> {"op": "predict", "rows": [[...], ..]} <- {"labels": [...], "probas": [...]}
  -> {"op": "bye"}                          (adapter exits 0)
"""

from __future__ import annotations

import json
import subprocess
import threading
from queue import Empty, Queue

import numpy as np

from .base import ModelError


class AdapterError(ModelError):
    pass


class ExternalModel:
    """Runs the adapter command and proxies predict/predict_proba through it."""

    def __init__(self, command: list[str], columns: list, timeout: float = 30.0):
        self.command = list(command)
        self.columns = list(columns)
        self.timeout = timeout
        self.proc = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            bufsize=1,
        )
        self._lines: Queue = Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        reply = self._roundtrip({"op": "hello", "columns": self.columns})
        if reply.get("ok") is not True:
            raise AdapterError(f"handshake rejected: {reply!r}")

    def _pump(self):
        for line in self.proc.stdout:
            self._lines.put(line)

    def _roundtrip(self, msg: dict) -> dict:
        if self.proc.poll() is not None:
            raise AdapterError(f"adapter exited with code {self.proc.returncode}")
        try:
            self.proc.stdin.write(json.dumps(msg) + "\n")
            self.proc.stdin.flush()
        except BrokenPipeError as exc:
            raise AdapterError("adapter closed its stdin") from exc
        try:
            line = self._lines.get(timeout=self.timeout)
        except Empty:
            raise AdapterError(f"adapter reply timed out after {self.timeout}s") from None
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise AdapterError(f"malformed adapter line: {line!r}") from exc

    def predict_batch(self, rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        reply = self._roundtrip({"op": "predict", "rows": rows.tolist()})
        labels = reply.get("labels")
        probas = reply.get("probas")
        if labels is None or probas is None or len(labels) != len(rows) or len(probas) != len(rows):
            raise AdapterError(f"bad predict reply shape: {reply!r}")
        for i, p in enumerate(probas):
            if not 0.0 <= p <= 1.0:
                raise AdapterError(f"row {i}: proba {p} outside [0, 1]")
        return np.asarray(labels, dtype=int), np.asarray(probas, dtype=float)

    # predict_proba/predict let an ExternalModel sit inside a ClassifierHandle
    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.predict_batch(X)[1]

    def close(self):
        if self.proc.poll() is None:
            try:
                self.proc.stdin.write(json.dumps({"op": "bye"}) + "\n")
                self.proc.stdin.flush()
            except BrokenPipeError:
                pass
            self.proc.wait(timeout=10)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def external_predict(adapter_config: dict, batch: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One-shot convenience: spawn, handshake, predict a batch, shut down."""
    with ExternalModel(
        adapter_config["command"],
        adapter_config.get("columns", []),
        timeout=adapter_config.get("timeout", 30.0),
    ) as model:
        return model.predict_batch(batch)
