"""File formats: long-format dataset CSV, parameter files, reports, manifests.

Everything is plain UTF-8 text. Floats are written with ``repr`` so that a
load/save round trip of any file produced here is byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import platform
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy

from . import __version__
from .dataset import ChoiceDataset, Individual
from .estimator import EstimationResult
from .model import (
    ALTERNATIVES,
    AgeGroup,
    Alternative,
    AttributeBundle,
    CurrentMode,
    DatasetKind,
    IncomeBand,
    ModelSpec,
    ParameterVector,
    Persona,
    Purpose,
    TaskObservation,
    TripContext,
    ValidationError,
)
from .simulator import ShareTable

_ATTRIBUTE_COLUMNS = (
    "travel_time_min",
    "travel_cost_eur",
    "access_egress_time_min",
    "congestion_chance",
    "congestion_delay",
    "parking_search_time_min",
    "parking_fee_eur",
)

DATASET_COLUMNS = (
    ("individual_id", "task_id", "alt", "available", "chosen")
    + _ATTRIBUTE_COLUMNS
    + ("age_group", "higher_education", "income_band", "has_children",
       "current_mode", "purpose", "distance_km")
)


def _bool(value: bool) -> str:
    return "1" if value else "0"


def save_dataset(dataset: ChoiceDataset, path) -> None:
    """Long format: one row per individual x task x alternative."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(DATASET_COLUMNS)
        for ind in dataset.individuals:
            persona = ind.persona
            mode = persona.current_mode
            mode_label = mode.value if isinstance(mode, CurrentMode) else str(mode)
            for obs in ind.tasks:
                for alt in ALTERNATIVES:
                    bundle = obs.attributes[alt]
                    writer.writerow(
                        (
                            ind.individual_id,
                            obs.task_id,
                            alt.value,
                            _bool(obs.availability[alt]),
                            _bool(obs.chosen is alt),
                        )
                        + tuple(repr(getattr(bundle, c)) for c in _ATTRIBUTE_COLUMNS)
                        + (
                            persona.age_group.value,
                            _bool(persona.higher_education),
                            persona.income_band.value,
                            _bool(persona.has_children),
                            mode_label,
                            obs.context.purpose.value,
                            repr(obs.context.distance_km),
                        )
                    )


def load_dataset(path) -> ChoiceDataset:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != DATASET_COLUMNS:
            raise ValidationError(f"unexpected dataset header in {path}")
        rows = list(reader)
    if not rows:
        raise ValidationError(f"dataset {path} has no data rows")

    individuals: list[Individual] = []
    current: dict | None = None

    def flush(state) -> None:
        tasks = tuple(
            TaskObservation(
                task_id=t["task_id"],
                context=t["context"],
                sq_mode=t["sq_mode"],
                attributes=t["attrs"],
                availability=t["avail"],
                chosen=t["chosen"],
            )
            for t in state["tasks"]
        )
        individuals.append(
            Individual(individual_id=state["id"], persona=state["persona"], tasks=tasks)
        )

    for row in rows:
        record = dict(zip(DATASET_COLUMNS, row))
        ind_id = int(record["individual_id"])
        if current is None or current["id"] != ind_id:
            if current is not None:
                flush(current)
            persona = Persona(
                age_group=AgeGroup(record["age_group"]),
                higher_education=record["higher_education"] == "1",
                income_band=IncomeBand(record["income_band"]),
                has_children=record["has_children"] == "1",
                current_mode=CurrentMode(record["current_mode"]),
            )
            current = {"id": ind_id, "persona": persona, "tasks": []}
        task_id = record["task_id"]
        # the three alternative rows of a task are consecutive in the file
        if not current["tasks"] or current["tasks"][-1]["task_id"] != task_id:
            current["tasks"].append(
                {
                    "task_id": task_id,
                    "context": TripContext(
                        Purpose(record["purpose"]), float(record["distance_km"])
                    ),
                    "sq_mode": CurrentMode(record["current_mode"]),
                    "attrs": {},
                    "avail": {},
                    "chosen": None,
                }
            )
        task = current["tasks"][-1]
        alt = Alternative(record["alt"])
        task["attrs"][alt] = AttributeBundle(
            **{c: float(record[c]) for c in _ATTRIBUTE_COLUMNS}
        )
        task["avail"][alt] = record["available"] == "1"
        if record["chosen"] == "1":
            task["chosen"] = alt
    if current is not None:
        flush(current)

    purposes = {obs.context.purpose for ind in individuals for obs in ind.tasks}
    kind = (
        DatasetKind.COMMUTE if purposes == {Purpose.COMMUTE} else DatasetKind.NONCOMMUTE
    )
    return ChoiceDataset(kind, tuple(individuals))


# ---------------------------------------------------------------------------
# Parameter files


def save_params(params: ParameterVector, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("name,value,fixed\n")
        for name in params.names:
            fixed = _bool(name in params.fixed)
            handle.write(f"{name},{params.values[name]!r},{fixed}\n")


def load_params(path) -> ParameterVector:
    values: dict[str, float] = {}
    fixed: set[str] = set()
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        if header != ["name", "value", "fixed"]:
            raise ValidationError(f"unexpected parameter header in {path}")
        for name, value, flag in reader:
            values[name] = float(value)
            if flag == "1":
                fixed.add(name)
    return ParameterVector(values, frozenset(fixed))


# ---------------------------------------------------------------------------
# Estimation reports


def _is_socio(term) -> bool:
    c = term.condition
    return (
        c.age_groups is not None
        or c.income_bands is not None
        or c.higher_education is not None
        or c.has_children is not None
    )


def _report_sections(spec: ModelSpec) -> list[tuple[str, list[str]]]:
    constants, attributes, socio = [], [], []
    seen = set()
    for term in spec.terms:
        if term.coefficient in seen:
            continue
        seen.add(term.coefficient)
        if term.covariate != "const":
            attributes.append(term.coefficient)
        elif _is_socio(term):
            socio.append(term.coefficient)
        else:
            constants.append(term.coefficient)
    constants.extend(spec.sigma_names)
    return [
        ("Alternative specific constants", constants),
        ("Mode attributes", attributes),
        ("Socio-demographic variables", socio),
    ]


def format_results_text(result: EstimationResult, spec: ModelSpec) -> str:
    lines = []
    estimates = result.estimates
    p_values = result.p_values or {}
    for title, names in _report_sections(spec):
        if not names:
            continue
        lines.append(title)
        for name in names:
            value = f"{estimates[name]:.4g}"
            if name in p_values:
                p = f"{p_values[name]:.2f}"
            elif name in estimates.fixed:
                p = "fixed"
            else:
                p = "-"
            lines.append(f"  {name:<28}{value:>10}  {p:>6}")
    fit = result.fit
    lines.append("Model summary")
    lines.append(f"  {'Null log-likelihood':<28}{fit.null_ll:>10.1f}")
    lines.append(f"  {'Final log-likelihood':<28}{fit.final_ll:>10.1f}")
    lines.append(f"  {'Pseudo rho-square':<28}{fit.rho_square:>10.3f}")
    lines.append(f"  {'Number of parameters':<28}{fit.n_parameters:>10}")
    lines.append(f"  {'Number of observations':<28}{fit.n_observations:>10}")
    lines.append(f"  {'Number of individuals':<28}{fit.n_individuals:>10}")
    conv = result.convergence
    status = "converged" if conv.converged else "NOT converged"
    lines.append(
        f"Convergence: {status} ({conv.iterations} iterations, "
        f"gradient norm {conv.gradient_norm:.2e})"
    )
    return "\n".join(lines) + "\n"


def save_results(result: EstimationResult, spec: ModelSpec, out_dir) -> None:
    out_dir = Path(out_dir)
    (out_dir / "results.txt").write_text(format_results_text(result, spec), encoding="utf-8")
    with open(out_dir / "results.csv", "w", encoding="utf-8", newline="") as handle:
        handle.write("section,name,estimate,std_error,p_value\n")
        se = result.std_errors or {}
        pv = result.p_values or {}
        for title, names in _report_sections(spec):
            for name in names:
                se_s = repr(se[name]) if name in se else ""
                pv_s = repr(pv[name]) if name in pv else ""
                handle.write(
                    f"{title},{name},{result.estimates[name]!r},{se_s},{pv_s}\n"
                )
    save_params(result.estimates, out_dir / "estimates.csv")


# ---------------------------------------------------------------------------
# Share and policy tables


def format_share_table_text(table: ShareTable, excluded: Sequence[str] = ()) -> str:
    header = f"{'current mode':<14}{'km':>5}  {'status quo':>11}{'shared EV':>11}{'shared e-bike':>14}"
    lines = [header]
    for row in table.rows:
        shares = row.shares
        lines.append(
            f"{row.current_mode.value:<14}{row.distance_km:>5g}  "
            f"{shares[Alternative.STATUS_QUO]:>10.1f}%{shares[Alternative.SHARED_EV]:>10.1f}%"
            f"{shares[Alternative.SHARED_EBIKE]:>13.1f}%"
        )
    if excluded:
        lines.append("Excluded cells: " + "; ".join(excluded))
    return "\n".join(lines) + "\n"


def save_share_table(table: ShareTable, out_dir, excluded: Sequence[str] = ()) -> None:
    out_dir = Path(out_dir)
    (out_dir / "shares.txt").write_text(
        format_share_table_text(table, excluded), encoding="utf-8"
    )
    with open(out_dir / "shares.csv", "w", encoding="utf-8", newline="") as handle:
        handle.write("current_mode,distance_km,status_quo_pct,shared_ev_pct,shared_ebike_pct\n")
        for row in table.rows:
            handle.write(
                f"{row.current_mode.value},{row.distance_km!r},"
                f"{row.shares[Alternative.STATUS_QUO]:.1f},"
                f"{row.shares[Alternative.SHARED_EV]:.1f},"
                f"{row.shares[Alternative.SHARED_EBIKE]:.1f}\n"
            )
        for cell in excluded:
            handle.write(f"# excluded: {cell}\n")


def format_policy_table_text(
    shares: Mapping[str, Sequence[float]], deltas: Mapping[str, Mapping[Alternative, float]]
) -> str:
    header = (
        f"{'policy':<32}{'status quo':>11}{'shared EV':>11}{'shared e-bike':>14}   delta vs base (pp)"
    )
    lines = [header]
    for name, values in shares.items():
        row = f"{name:<32}{values[0]:>10.1f}%{values[1]:>10.1f}%{values[2]:>13.1f}%"
        if name in deltas:
            d = deltas[name]
            row += (
                f"   {d[Alternative.STATUS_QUO]:+.1f} / "
                f"{d[Alternative.SHARED_EV]:+.1f} / "
                f"{d[Alternative.SHARED_EBIKE]:+.1f}"
            )
        lines.append(row)
    return "\n".join(lines) + "\n"


def save_policy_table(
    shares: Mapping[str, Sequence[float]],
    deltas: Mapping[str, Mapping[Alternative, float]],
    out_dir,
) -> None:
    out_dir = Path(out_dir)
    (out_dir / "policies.txt").write_text(
        format_policy_table_text(shares, deltas), encoding="utf-8"
    )
    with open(out_dir / "policies.csv", "w", encoding="utf-8", newline="") as handle:
        handle.write(
            "policy,status_quo_pct,shared_ev_pct,shared_ebike_pct,"
            "delta_status_quo_pp,delta_shared_ev_pp,delta_shared_ebike_pp\n"
        )
        for name, values in shares.items():
            row = f"{name},{values[0]:.1f},{values[1]:.1f},{values[2]:.1f}"
            if name in deltas:
                d = deltas[name]
                row += (
                    f",{d[Alternative.STATUS_QUO]:.1f}"
                    f",{d[Alternative.SHARED_EV]:.1f}"
                    f",{d[Alternative.SHARED_EBIKE]:.1f}"
                )
            else:
                row += ",,,"
            handle.write(row + "\n")


# ---------------------------------------------------------------------------
# Design files


def save_design(tasks: Sequence[TaskObservation], out_dir) -> None:
    out_dir = Path(out_dir)
    with open(out_dir / "design.csv", "w", encoding="utf-8", newline="") as handle:
        handle.write("task_id,alternative,attribute,value\n")
        for obs in tasks:
            for alt in ALTERNATIVES:
                bundle = obs.attributes[alt]
                for column in _ATTRIBUTE_COLUMNS:
                    handle.write(f"{obs.task_id},{alt.value},{column},{getattr(bundle, column)!r}\n")


def save_codebook(plan, context_note: str, out_dir) -> None:
    out_dir = Path(out_dir)
    lines = [context_note, "", "factors and levels (orthogonal 27-run design):"]
    for name, levels in zip(plan.factors, plan.levels):
        lines.append(f"  {name}: " + ", ".join(f"{lv:g}" for lv in levels))
    lines.append("")
    lines.append("attribute columns in design.csv: " + ", ".join(_ATTRIBUTE_COLUMNS))
    (out_dir / "codebook.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Run manifests


def _digest(path: Path) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    return h.hexdigest()


def write_manifest(out_dir, command: str, config: Mapping, inputs: Iterable = ()) -> None:
    """Record everything needed to reproduce a run."""
    out_dir = Path(out_dir)
    manifest = {
        "command": command,
        "config": dict(config),
        "versions": {
            "modeswitch": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "inputs": {str(p): _digest(Path(p)) for p in inputs},
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
