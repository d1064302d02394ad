"""Declarative text format for model specifications.

A spec file is a small line-based document: a ``kind`` header, a ``[terms]``
section with one pipe-separated line per utility term, an
``[error_components]`` section, and an ``[availability]`` section. There is
no expression language; terms are linear and conditions are bare key=value
constraints. Writing and re-parsing a spec is lossless.
"""

from __future__ import annotations

from pathlib import Path

from .model import (
    AgeGroup,
    Alternative,
    Condition,
    CONDITIONAL_SWITCHING,
    CurrentMode,
    DatasetKind,
    ErrorComponent,
    IncomeBand,
    ModelSpec,
    Purpose,
    SpecificationError,
    UtilityTerm,
)

_BOOL_TOKENS = {"yes": True, "no": False}


def _format_condition(condition: Condition) -> str:
    parts = []
    if condition.modes is not None:
        parts.append("mode=" + ",".join(sorted(m.value for m in condition.modes)))
    if condition.purposes is not None:
        parts.append("purpose=" + ",".join(sorted(p.value for p in condition.purposes)))
    if condition.distances is not None:
        parts.append("distance=" + ",".join(f"{d:g}" for d in sorted(condition.distances)))
    if condition.age_groups is not None:
        parts.append("age=" + ",".join(sorted(a.value for a in condition.age_groups)))
    if condition.income_bands is not None:
        parts.append("income=" + ",".join(sorted(b.value for b in condition.income_bands)))
    if condition.higher_education is not None:
        parts.append("education=" + ("yes" if condition.higher_education else "no"))
    if condition.has_children is not None:
        parts.append("children=" + ("yes" if condition.has_children else "no"))
    return " ".join(parts) if parts else "*"


def _parse_condition(text: str) -> Condition:
    text = text.strip()
    if text == "*":
        return Condition()
    kwargs: dict = {}
    for token in text.split():
        if "=" not in token:
            raise SpecificationError(f"bad condition token {token!r}")
        key, _, raw = token.partition("=")
        values = raw.split(",")
        if key == "mode":
            kwargs["modes"] = frozenset(CurrentMode(v) for v in values)
        elif key == "purpose":
            kwargs["purposes"] = frozenset(Purpose(v) for v in values)
        elif key == "distance":
            kwargs["distances"] = frozenset(float(v) for v in values)
        elif key == "age":
            kwargs["age_groups"] = frozenset(AgeGroup(v) for v in values)
        elif key == "income":
            kwargs["income_bands"] = frozenset(IncomeBand(v) for v in values)
        elif key == "education":
            kwargs["higher_education"] = _BOOL_TOKENS[raw]
        elif key == "children":
            kwargs["has_children"] = _BOOL_TOKENS[raw]
        else:
            raise SpecificationError(f"unknown condition key {key!r}")
    return Condition(**kwargs)


def format_spec(spec: ModelSpec) -> str:
    lines = [f"kind: {spec.kind.value}", "", "[terms]"]
    lines.append("# coefficient | alternatives | covariate | condition")
    for term in spec.terms:
        alts = ",".join(
            alt.value for alt in sorted(term.alternatives, key=lambda a: a.value)
        )
        lines.append(
            f"{term.coefficient} | {alts} | {term.covariate} | "
            f"{_format_condition(term.condition)}"
        )
    lines += ["", "[error_components]"]
    for component in spec.error_components:
        alts = ",".join(
            alt.value for alt in sorted(component.alternatives, key=lambda a: a.value)
        )
        lines.append(f"{component.name} | {alts}")
    lines += ["", "[availability]", spec.availability_rule, ""]
    return "\n".join(lines)


def parse_spec(text: str) -> ModelSpec:
    kind: DatasetKind | None = None
    section = None
    terms: list[UtilityTerm] = []
    components: list[ErrorComponent] = []
    availability = CONDITIONAL_SWITCHING
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            continue
        if line.startswith("kind:"):
            kind = DatasetKind(line.split(":", 1)[1].strip())
            continue
        if section == "terms":
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 4:
                raise SpecificationError(f"line {lineno}: a term has 4 pipe-separated fields")
            coefficient, alts, covariate, condition = parts
            terms.append(
                UtilityTerm(
                    coefficient,
                    frozenset(Alternative(a) for a in alts.split(",")),
                    covariate,
                    _parse_condition(condition),
                )
            )
        elif section == "error_components":
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 2:
                raise SpecificationError(f"line {lineno}: a component has 2 pipe-separated fields")
            name, alts = parts
            components.append(
                ErrorComponent(name, frozenset(Alternative(a) for a in alts.split(",")))
            )
        elif section == "availability":
            availability = line
        else:
            raise SpecificationError(f"line {lineno}: content outside a known section")
    if kind is None:
        raise SpecificationError("spec file lacks a 'kind:' header")
    return ModelSpec(kind, tuple(terms), tuple(components), availability)


def save_spec(spec: ModelSpec, path) -> None:
    Path(path).write_text(format_spec(spec), encoding="utf-8")


def load_spec(path) -> ModelSpec:
    return parse_spec(Path(path).read_text(encoding="utf-8"))
