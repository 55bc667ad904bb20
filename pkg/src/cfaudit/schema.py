"""Feature schema: column kinds, target, sensitive groups, remapping rules."""

from __future__ import annotations

from dataclasses import dataclass, field

import yaml


class SchemaError(ValueError):
    """Schema file or schema construction problem."""


NUMERIC = "numeric"
ORDINAL = "ordinal"
CATEGORICAL = "categorical"

_KINDS = (NUMERIC, ORDINAL, CATEGORICAL)


@dataclass(frozen=True)
class Feature:
    name: str
    kind: str
    levels: tuple = ()

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise SchemaError(f"unknown feature kind {self.kind!r} for {self.name!r}")
        if self.kind in (ORDINAL, CATEGORICAL):
            if not self.levels:
                raise SchemaError(f"feature {self.name!r} ({self.kind}) needs levels")
            if len(set(self.levels)) != len(self.levels):
                raise SchemaError(f"feature {self.name!r} has duplicate levels")
        elif self.levels:
            raise SchemaError(f"numeric feature {self.name!r} cannot declare levels")


@dataclass(frozen=True)
class GroupSpec:
    """One sensitive column with its privileged / unprivileged values."""

    name: str
    privileged: str
    unprivileged: str

    def __post_init__(self):
        if self.privileged == self.unprivileged:
            raise SchemaError(
                f"sensitive {self.name!r}: privileged and unprivileged values coincide"
            )

    def swapped(self) -> "GroupSpec":
        return GroupSpec(self.name, self.unprivileged, self.privileged)


@dataclass(frozen=True)
class FeatureSchema:
    """Declares model-input features, the binary target, and sensitive columns.

    Sensitive columns are deliberately disjoint from the feature list: the
    audited models never see them as inputs.
    """

    features: tuple[Feature, ...]
    target: str
    positive_label: str
    sensitive: tuple[GroupSpec, ...]
    # per-column value remapping applied at ingestion (e.g. level condensation)
    remap: dict = field(default_factory=dict)
    missing_sentinel: str = "?"

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate feature names")
        reserved = {self.target} | {g.name for g in self.sensitive}
        overlap = reserved & set(names)
        if overlap:
            raise SchemaError(f"target/sensitive columns also listed as features: {overlap}")

    @property
    def feature_names(self) -> list[str]:
        return [f.name for f in self.features]

    @property
    def columns(self) -> list[str]:
        """All columns the loader expects: features, target, sensitive."""
        return self.feature_names + [self.target] + [g.name for g in self.sensitive]

    def feature(self, name: str) -> Feature:
        for f in self.features:
            if f.name == name:
                return f
        raise KeyError(name)

    def group(self, name: str) -> GroupSpec:
        for g in self.sensitive:
            if g.name == name:
                return g
        raise KeyError(name)


def _parse_feature(entry: dict) -> Feature:
    if "name" not in entry or "kind" not in entry:
        raise SchemaError(f"feature entry needs 'name' and 'kind': {entry!r}")
    levels = tuple(str(v) for v in entry.get("levels", ()))
    return Feature(name=str(entry["name"]), kind=str(entry["kind"]), levels=levels)


def schema_from_dict(doc: dict) -> FeatureSchema:
    try:
        features = tuple(_parse_feature(e) for e in doc["features"])
        target = doc["target"]
        sensitive = tuple(
            GroupSpec(str(g["name"]), str(g["privileged"]), str(g["unprivileged"]))
            for g in doc.get("sensitive", ())
        )
    except KeyError as exc:
        raise SchemaError(f"schema file missing key: {exc}") from exc
    remap = {
        col: {str(k): str(v) for k, v in mapping.items()}
        for col, mapping in doc.get("remap", {}).items()
    }
    return FeatureSchema(
        features=features,
        target=str(target["name"]),
        positive_label=str(target["positive"]),
        sensitive=sensitive,
        remap=remap,
        missing_sentinel=str(doc.get("missing_sentinel", "?")),
    )


def load_schema(path: str) -> FeatureSchema:
    """Read a YAML schema file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a mapping at top level")
    return schema_from_dict(doc)
