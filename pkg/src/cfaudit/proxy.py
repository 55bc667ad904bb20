"""Proxy-feature ranking: correlate perturbations with sensitive-probability shifts."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cfgen import perturbation
from .data import encode_rows, encoded_column_map
from .schema import FeatureSchema


class ProxyError(ValueError):
    pass


@dataclass(frozen=True)
class ProxyEntry:
    feature: str
    level: str | None
    rho: float | None  # None when the column or the shifts have zero variance
    n_pairs: int


@dataclass(frozen=True)
class ProxyReport:
    entries: tuple[ProxyEntry, ...]

    def defined(self) -> list[ProxyEntry]:
        return [e for e in self.entries if e.rho is not None]

    def per_feature(self) -> list[tuple[str, float]]:
        """Aggregate per original feature as max |rho| over its levels."""
        best: dict[str, float] = {}
        for e in self.defined():
            cur = best.get(e.feature)
            if cur is None or abs(e.rho) > cur:
                best[e.feature] = abs(e.rho)
        return sorted(best.items(), key=lambda t: -t[1])


def delta_shift(x: dict, c_x: dict, f_s, schema: FeatureSchema) -> float:
    """Shift in the sensitive classifier's privileged-class probability."""
    probas = f_s.predict_proba(encode_rows([x, c_x], schema))
    return float(probas[1] - probas[0])


def _pearson(a: np.ndarray, b: np.ndarray) -> float | None:
    if np.std(a) == 0 or np.std(b) == 0:
        return None
    a = a - a.mean()
    b = b - b.mean()
    return float((a @ b) / np.sqrt((a @ a) * (b @ b)))


def proxy_correlations(
    pairs: list[tuple[dict, dict]], f_s, schema: FeatureSchema
) -> ProxyReport:
    """Pearson rho of every encoded perturbation column against the shift
    vector, over all (origin, counterfactual) pairs."""
    if len(pairs) < 3:
        raise ProxyError(f"need at least 3 pairs, got {len(pairs)}")
    eps = np.stack([perturbation(x, c, schema) for x, c in pairs])

    origins = encode_rows([x for x, _ in pairs], schema)
    cfs = encode_rows([c for _, c in pairs], schema)
    delta = f_s.predict_proba(cfs) - f_s.predict_proba(origins)

    cmap = encoded_column_map(schema)
    entries = tuple(
        ProxyEntry(feature, level, _pearson(eps[:, j], delta), len(pairs))
        for j, (feature, level) in enumerate(cmap)
    )
    return ProxyReport(entries)


def top_k(report: ProxyReport, k: int) -> list[ProxyEntry]:
    """Top k by |rho|; undefined entries excluded; declaration order breaks ties."""
    defined = report.defined()
    ranked = sorted(
        enumerate(defined), key=lambda t: (-abs(t[1].rho), t[0])
    )
    return [e for _, e in ranked[:k]]
