"""Stated-choice experimental designs: 27-run orthogonal batteries.

Both experiments vary 3-level attributes over a strength-2 orthogonal
array. Commuting batteries peg the status quo to the respondent's reported
reference trip and derive shared-mode travel times from distance;
non-commuting batteries vary all three alternatives on distance-specific
level grids.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import (
    ALTERNATIVES,
    Alternative,
    AttributeBundle,
    CurrentMode,
    DatasetKind,
    Purpose,
    TaskObservation,
    TripContext,
    ValidationError,
)

# Nonzero linear forms over GF(3), one representative per proportionality
# class, leading coefficient 1. Any two are linearly independent, which is
# exactly strength-2 for the 27-run array.
_GF3_FORMS = (
    (1, 0, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 1, 0),
    (1, 2, 0),
    (1, 0, 1),
    (1, 0, 2),
    (0, 1, 1),
    (0, 1, 2),
    (1, 1, 1),
    (1, 1, 2),
    (1, 2, 1),
    (1, 2, 2),
)

MAX_FACTORS = len(_GF3_FORMS)


def orthogonal_array_27(k: int) -> np.ndarray:
    """27 x k array over {0, 1, 2} in which every column pair is balanced."""
    if not 1 <= k <= MAX_FACTORS:
        raise ValidationError(f"factor count must be between 1 and {MAX_FACTORS}, got {k}")
    rows = np.arange(27)
    digits = np.stack([rows // 9, (rows // 3) % 3, rows % 3], axis=1)
    forms = np.array(_GF3_FORMS[:k]).T
    return (digits @ forms) % 3


@dataclass(frozen=True)
class DesignPlan:
    """Factor names, their three numeric levels, and the 27-run level matrix."""

    factors: tuple[str, ...]
    levels: tuple[tuple[float, ...], ...]
    matrix: np.ndarray

    def __post_init__(self) -> None:
        if len(self.factors) != len(self.levels):
            raise ValidationError("one level triple per factor required")
        for name, triple in zip(self.factors, self.levels):
            if len(triple) != 3:
                raise ValidationError(f"factor {name} must have exactly 3 levels")
        if self.matrix.shape != (27, len(self.factors)):
            raise ValidationError("design matrix must be 27 x number of factors")

    def value(self, run: int, factor: str) -> float:
        column = self.factors.index(factor)
        return self.levels[column][int(self.matrix[run, column])]


def _plan(factors: Sequence[tuple[str, tuple[float, float, float]]]) -> DesignPlan:
    names = tuple(name for name, _ in factors)
    levels = tuple(tuple(lv) for _, lv in factors)
    return DesignPlan(names, levels, orthogonal_array_27(len(names)))


@dataclass(frozen=True)
class ReferenceTrip:
    """Reported attributes of the respondent's current commuting trip."""

    mode: CurrentMode
    distance_km: float
    travel_time_min: float
    travel_cost_eur: float = 0.0
    access_egress_time_min: float = 0.0
    congestion_chance: float = 0.0
    congestion_time_min: float = 0.0
    parking_search_time_min: float = 0.0
    parking_fee_eur: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in (CurrentMode.CAR, CurrentMode.BIKE):
            raise ValidationError("commuting reference trips cover car and bike users only")
        if self.distance_km <= 0 or self.distance_km > 10:
            raise ValidationError("commuting trips are between 0 and 10 km")
        if self.travel_time_min <= 0:
            raise ValidationError("reference travel time must be positive")
        if self.access_egress_time_min >= 60:
            raise ValidationError("access and egress of an hour or more fails the plausibility screen")
        if not 0.0 <= self.congestion_chance <= 1.0:
            raise ValidationError("congestion chance must lie in [0, 1]")
        for name in ("travel_cost_eur", "congestion_time_min", "parking_search_time_min", "parking_fee_eur"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative")
        speed = self.distance_km / (self.travel_time_min / 60.0)
        if self.mode is CurrentMode.BIKE and speed > 40.0:
            raise ValidationError(f"bike speed {speed:.1f} km/h fails the 40 km/h screen")
        self._soft_warnings(speed)

    def _soft_warnings(self, speed: float) -> None:
        ranges = {
            CurrentMode.CAR: {"travel_time_min": (1, 45), "travel_cost_eur": (0, 9.9)},
            CurrentMode.BIKE: {"travel_time_min": (4, 45), "parking_search_time_min": (0, 10)},
        }
        for name, (low, high) in ranges[self.mode].items():
            value = getattr(self, name)
            if not low <= value <= high:
                warnings.warn(
                    f"reference {name}={value} is outside the observed range [{low}, {high}]",
                    stacklevel=3,
                )


_FULL_AVAILABILITY = {alt: True for alt in ALTERNATIVES}

EHUB_ACCESS_COMMUTE = (2.0, 10.0, 18.0)
SEV_TARIFF_PER_MIN = (0.15, 0.25, 0.35)
SEB_FEE_COMMUTE = (0.5, 1.5, 2.5)
SEB_FEE_NONCOMMUTE = (0.5, 1.0, 1.5)
TIME_MULTIPLIERS = (0.8, 1.0, 1.2)
CONGESTION_CHANCE = (0.0, 0.2, 0.4)
CONGESTION_DELAY_FRACTION = (0.25, 0.5, 0.75)
SEV_REFERENCE_SPEED_KMH = 30.0
SEB_REFERENCE_SPEED_KMH = 20.0

# Non-commuting level grids, keyed by distance in km.
NONCOMMUTE_LEVELS = {
    "ehub_access": {2.0: (2.0, 6.0, 10.0), 5.0: (2.0, 10.0, 18.0), 10.0: (2.0, 10.0, 18.0)},
    "sev_time": {2.0: (3.0, 5.0, 7.0), 5.0: (7.0, 10.0, 13.0), 10.0: (15.0, 20.0, 25.0)},
    "seb_time": {2.0: (4.0, 6.0, 8.0), 5.0: (10.0, 12.0, 14.0), 10.0: (20.0, 25.0, 30.0)},
    "pt_time": {2.0: (4.0, 6.0, 8.0), 5.0: (10.0, 15.0, 20.0), 10.0: (20.0, 30.0, 40.0)},
    "pt_cost": {2.0: (0.5, 1.0, 1.5), 5.0: (1.0, 1.5, 2.0), 10.0: (2.0, 3.0, 4.0)},
    "bike_time": {2.0: (6.0, 8.0, 10.0), 5.0: (15.0, 20.0, 25.0), 10.0: (30.0, 40.0, 50.0)},
    "walk_time": {2.0: (20.0, 25.0, 30.0), 5.0: (50.0, 60.0, 70.0)},
    "sq_egress": {2.0: (1.0, 3.0, 5.0), 5.0: (1.0, 5.0, 9.0), 10.0: (1.0, 5.0, 9.0)},
}
CAR_COST_PER_KM = (0.1, 0.2, 0.3)
PARKING_SEARCH = (0.0, 5.0, 10.0)
CAR_PARKING_FEE = (0.0, 3.0, 6.0)


def _congestion_pair(chance: float, delay: float) -> tuple[float, float]:
    # a zero chance zeroes the delay so the bundle invariant holds
    return (chance, delay if chance > 0.0 else 0.0)


def commuting_plan(ref: ReferenceTrip) -> DesignPlan:
    factors = [
        ("ehub_access", EHUB_ACCESS_COMMUTE),
        ("sev_tariff", SEV_TARIFF_PER_MIN),
        ("seb_time_multiplier", TIME_MULTIPLIERS),
        ("seb_fee", SEB_FEE_COMMUTE),
    ]
    if ref.mode is not CurrentMode.CAR:
        factors += [
            ("sev_time_multiplier", TIME_MULTIPLIERS),
            ("sev_congestion_chance", CONGESTION_CHANCE),
            ("sev_congestion_delay_fraction", CONGESTION_DELAY_FRACTION),
        ]
    return _plan(factors)


def build_commuting_tasks(ref: ReferenceTrip) -> tuple[TaskObservation, ...]:
    """27 unanswered commuting tasks with the status quo pegged to ``ref``."""
    plan = commuting_plan(ref)
    context = TripContext(Purpose.COMMUTE, ref.distance_km)

    sq_kwargs = dict(
        travel_time_min=ref.travel_time_min,
        access_egress_time_min=ref.access_egress_time_min,
        parking_search_time_min=ref.parking_search_time_min,
    )
    if ref.mode is CurrentMode.CAR:
        chance, delay = _congestion_pair(ref.congestion_chance, ref.congestion_time_min)
        sq_kwargs.update(
            travel_cost_eur=ref.travel_cost_eur,
            congestion_chance=chance,
            congestion_delay=delay,
            parking_fee_eur=ref.parking_fee_eur,
        )
    sq_bundle = AttributeBundle(**sq_kwargs)

    sev_reference_time = ref.distance_km / SEV_REFERENCE_SPEED_KMH * 60.0
    seb_reference_time = ref.distance_km / SEB_REFERENCE_SPEED_KMH * 60.0

    tasks = []
    for run in range(27):
        access = plan.value(run, "ehub_access")
        if ref.mode is CurrentMode.CAR:
            sev_time = ref.travel_time_min
            sev_chance, sev_delay = _congestion_pair(ref.congestion_chance, ref.congestion_time_min)
        else:
            sev_time = sev_reference_time * plan.value(run, "sev_time_multiplier")
            chance = plan.value(run, "sev_congestion_chance")
            sev_chance, sev_delay = _congestion_pair(
                chance, plan.value(run, "sev_congestion_delay_fraction") * sev_time
            )
        sev_bundle = AttributeBundle(
            travel_time_min=sev_time,
            travel_cost_eur=plan.value(run, "sev_tariff") * sev_time,
            access_egress_time_min=access,
            congestion_chance=sev_chance,
            congestion_delay=sev_delay,
        )
        seb_bundle = AttributeBundle(
            travel_time_min=seb_reference_time * plan.value(run, "seb_time_multiplier"),
            travel_cost_eur=plan.value(run, "seb_fee"),
            access_egress_time_min=access,
        )
        tasks.append(
            TaskObservation(
                task_id=f"commute-{run + 1:02d}",
                context=context,
                sq_mode=ref.mode,
                attributes={
                    Alternative.STATUS_QUO: sq_bundle,
                    Alternative.SHARED_EV: sev_bundle,
                    Alternative.SHARED_EBIKE: seb_bundle,
                },
                availability=dict(_FULL_AVAILABILITY),
            )
        )
    return tuple(tasks)


def noncommuting_plan(distance_km: float, current_mode: CurrentMode) -> DesignPlan:
    if distance_km not in (2.0, 5.0, 10.0):
        raise ValidationError("non-commuting distances are 2, 5 or 10 km")
    if current_mode is CurrentMode.WALK and distance_km == 10.0:
        raise ValidationError("walking is not a current mode for 10 km trips")
    grids = NONCOMMUTE_LEVELS
    factors = [
        ("ehub_access", grids["ehub_access"][distance_km]),
        ("sev_time", grids["sev_time"][distance_km]),
        ("sev_tariff", SEV_TARIFF_PER_MIN),
        ("seb_time", grids["seb_time"][distance_km]),
        ("seb_fee", SEB_FEE_NONCOMMUTE),
        ("congestion_chance", CONGESTION_CHANCE),
        ("congestion_delay_fraction", CONGESTION_DELAY_FRACTION),
    ]
    if current_mode is CurrentMode.CAR:
        factors += [
            ("sq_egress", grids["sq_egress"][distance_km]),
            ("car_cost_per_km", CAR_COST_PER_KM),
            ("parking_search", PARKING_SEARCH),
            ("car_parking_fee", CAR_PARKING_FEE),
        ]
    elif current_mode is CurrentMode.PUBLIC_TRANSPORT:
        factors += [
            ("pt_time", grids["pt_time"][distance_km]),
            ("pt_cost", grids["pt_cost"][distance_km]),
            ("sq_egress", grids["sq_egress"][distance_km]),
        ]
    elif current_mode is CurrentMode.BIKE:
        factors += [
            ("bike_time", grids["bike_time"][distance_km]),
            ("parking_search", PARKING_SEARCH),
        ]
    else:
        factors += [("walk_time", grids["walk_time"][distance_km])]
    return _plan(factors)


def build_noncommuting_tasks(
    distance_km: float, purpose: Purpose, current_mode: CurrentMode
) -> tuple[TaskObservation, ...]:
    """27 unanswered non-commuting tasks; the status quo varies too."""
    if purpose not in (Purpose.LEISURE, Purpose.SHOPPING):
        raise ValidationError("non-commuting purposes are leisure and shopping")
    distance_km = float(distance_km)
    plan = noncommuting_plan(distance_km, current_mode)
    context = TripContext(purpose, distance_km)

    tasks = []
    for run in range(27):
        access = plan.value(run, "ehub_access")
        sev_time = plan.value(run, "sev_time")
        chance, delay = _congestion_pair(
            plan.value(run, "congestion_chance"),
            plan.value(run, "congestion_delay_fraction"),
        )
        sev_bundle = AttributeBundle(
            travel_time_min=sev_time,
            travel_cost_eur=plan.value(run, "sev_tariff") * sev_time,
            access_egress_time_min=access,
            congestion_chance=chance,
            congestion_delay=delay,
        )
        seb_bundle = AttributeBundle(
            travel_time_min=plan.value(run, "seb_time"),
            travel_cost_eur=plan.value(run, "seb_fee"),
            access_egress_time_min=access,
        )
        if current_mode is CurrentMode.CAR:
            # car time and congestion mirror the shared EV by design
            sq_bundle = AttributeBundle(
                travel_time_min=sev_time,
                travel_cost_eur=plan.value(run, "car_cost_per_km") * distance_km,
                access_egress_time_min=plan.value(run, "sq_egress"),
                congestion_chance=chance,
                congestion_delay=delay,
                parking_search_time_min=plan.value(run, "parking_search"),
                parking_fee_eur=plan.value(run, "car_parking_fee"),
            )
        elif current_mode is CurrentMode.PUBLIC_TRANSPORT:
            sq_bundle = AttributeBundle(
                travel_time_min=plan.value(run, "pt_time"),
                travel_cost_eur=plan.value(run, "pt_cost"),
                access_egress_time_min=plan.value(run, "sq_egress"),
            )
        elif current_mode is CurrentMode.BIKE:
            sq_bundle = AttributeBundle(
                travel_time_min=plan.value(run, "bike_time"),
                parking_search_time_min=plan.value(run, "parking_search"),
            )
        else:
            sq_bundle = AttributeBundle(travel_time_min=plan.value(run, "walk_time"))
        tasks.append(
            TaskObservation(
                task_id=f"{purpose.value}-{distance_km:g}km-{run + 1:02d}",
                context=context,
                sq_mode=current_mode,
                attributes={
                    Alternative.STATUS_QUO: sq_bundle,
                    Alternative.SHARED_EV: sev_bundle,
                    Alternative.SHARED_EBIKE: seb_bundle,
                },
                availability=dict(_FULL_AVAILABILITY),
            )
        )
    return tuple(tasks)


def assign_tasks(
    battery: Sequence[TaskObservation], kind: DatasetKind, seed: int
) -> tuple[TaskObservation, ...]:
    """Pick one respondent's task set from a battery.

    Commuting respondents answer six random tasks of their 27-task battery;
    non-commuting respondents answer one random task per (distance, purpose)
    cell of a battery that spans several cells.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    battery = list(battery)
    if kind is DatasetKind.COMMUTE:
        if len(battery) != 27:
            raise ValidationError("a commuting battery holds exactly 27 tasks")
        picks = rng.choice(len(battery), size=6, replace=False)
        return tuple(battery[i] for i in sorted(picks))
    cells: dict[tuple[float, str], list[TaskObservation]] = {}
    for task in battery:
        cells.setdefault((task.context.distance_km, task.context.purpose.value), []).append(task)
    chosen = []
    for key in sorted(cells):
        group = cells[key]
        chosen.append(group[int(rng.integers(len(group)))])
    return tuple(chosen)
