import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modeswitch.model import (
    AgeGroup,
    AttributeBundle,
    CurrentMode,
    DatasetKind,
    IncomeBand,
    ParameterVector,
    Purpose,
    SpecificationError,
    ValidationError,
    availability,
    build_congestion_covariate,
    random_utility_offset,
    systematic_utility_ehub,
    systematic_utility_sq,
)

from conftest import SEB, SEV, SQ, make_task, persona


class TestStatusQuoUtility:
    def test_zero_parameters_give_zero(self, noncommute_spec, noncommute_estimates):
        zeros = noncommute_estimates.with_values(
            {name: 0.0 for name in noncommute_estimates.names}
        )
        obs = make_task(attributes={SQ: AttributeBundle(travel_time_min=20, travel_cost_eur=2)})
        assert systematic_utility_sq(obs, persona(), zeros, noncommute_spec) == 0.0

    def test_pt_user_time_and_cost(self, noncommute_spec, noncommute_estimates):
        obs = make_task(
            sq_mode=CurrentMode.PUBLIC_TRANSPORT,
            attributes={SQ: AttributeBundle(travel_time_min=15, travel_cost_eur=1.5)},
        )
        p = persona(mode=CurrentMode.PUBLIC_TRANSPORT)
        value = systematic_utility_sq(obs, p, noncommute_estimates, noncommute_spec)
        assert value == pytest.approx(-0.06 * 15 - 0.39 * 1.5, abs=1e-12)
        assert value == pytest.approx(-1.485, abs=1e-9)

    def test_car_user_parking_terms(self, noncommute_spec, noncommute_estimates):
        obs = make_task(
            attributes={SQ: AttributeBundle(parking_fee_eur=3, parking_search_time_min=5)}
        )
        value = systematic_utility_sq(obs, persona(), noncommute_estimates, noncommute_spec)
        assert value == pytest.approx(-0.08 * 3 - 0.04 * 5, abs=1e-12)
        assert value == pytest.approx(-0.44, abs=1e-9)

    def test_unavailable_status_quo_rejected(self, noncommute_spec, noncommute_estimates):
        obs = make_task(sq_mode=CurrentMode.CAR)
        with pytest.raises(ValidationError):
            systematic_utility_sq(
                obs, persona(mode=CurrentMode.BIKE), noncommute_estimates, noncommute_spec
            )

    def test_unresolved_coefficient_is_specification_error(self, noncommute_spec):
        incomplete = ParameterVector({"asc_sev": -1.0})
        obs = make_task(attributes={SQ: AttributeBundle(travel_time_min=10)})
        with pytest.raises(SpecificationError):
            systematic_utility_sq(obs, persona(), incomplete, noncommute_spec)

    def test_negative_attribute_rejected_at_construction(self):
        with pytest.raises(ValidationError):
            AttributeBundle(travel_time_min=-1)


class TestSharedUtility:
    def test_zero_parameters(self, noncommute_spec, noncommute_estimates):
        zeros = noncommute_estimates.with_values(
            {name: 0.0 for name in noncommute_estimates.names}
        )
        obs = make_task(attributes={SEV: AttributeBundle(travel_time_min=10)})
        assert systematic_utility_ehub(SEV, obs, persona(), zeros, noncommute_spec) == 0.0

    def test_sev_car_user_leisure(self, noncommute_spec, noncommute_estimates):
        obs = make_task(
            attributes={
                SEV: AttributeBundle(
                    travel_time_min=10,
                    travel_cost_eur=0.25 * 10,
                    access_egress_time_min=10,
                )
            }
        )
        value = systematic_utility_ehub(SEV, obs, persona(), noncommute_estimates, noncommute_spec)
        # constant, age shifter, time, cost, access
        assert value == pytest.approx(-4.33 + 1.45 - 0.6 + 0.05 - 0.4, abs=1e-9)
        assert value == pytest.approx(-3.83, abs=1e-9)

    def test_seb_bike_user_shopping_composition(self, noncommute_spec, noncommute_estimates):
        bundle = AttributeBundle(
            travel_time_min=12, travel_cost_eur=1.0, access_egress_time_min=10
        )
        base_persona = persona(mode=CurrentMode.BIKE, age=AgeGroup.MID, education=False)
        leisure = make_task(sq_mode=CurrentMode.BIKE, purpose=Purpose.LEISURE,
                            attributes={SEB: bundle})
        shopping = make_task(sq_mode=CurrentMode.BIKE, purpose=Purpose.SHOPPING,
                             attributes={SEB: bundle})
        v_leisure = systematic_utility_ehub(
            SEB, leisure, base_persona, noncommute_estimates, noncommute_spec
        )
        v_shopping = systematic_utility_ehub(
            SEB, shopping, base_persona, noncommute_estimates, noncommute_spec
        )
        attribute_part = 0.02 * 12 - 0.47 * 1.0 - 0.03 * 10
        assert v_leisure == pytest.approx(-3.47 - 1.68 + attribute_part, abs=1e-9)
        assert v_shopping - v_leisure == pytest.approx(-0.18, abs=1e-12)

    def test_walk_distance_asc_gating(self, noncommute_spec, noncommute_estimates):
        p = persona(mode=CurrentMode.WALK, age=AgeGroup.MID, education=False)
        at2 = make_task(sq_mode=CurrentMode.WALK, distance=2.0)
        at5 = make_task(sq_mode=CurrentMode.WALK, distance=5.0)
        v2 = systematic_utility_ehub(SEV, at2, p, noncommute_estimates, noncommute_spec)
        v5 = systematic_utility_ehub(SEV, at5, p, noncommute_estimates, noncommute_spec)
        assert v2 == pytest.approx(-4.33 - 0.56)
        assert v5 == pytest.approx(-4.33 + 0.86)

    def test_missing_income_matches_no_band_shifter(self, noncommute_spec, noncommute_estimates):
        low = persona(income=IncomeBand.LOW)
        missing = persona(income=IncomeBand.MISSING)
        obs = make_task()
        v_low = systematic_utility_ehub(SEB, obs, low, noncommute_estimates, noncommute_spec)
        v_missing = systematic_utility_ehub(SEB, obs, missing, noncommute_estimates, noncommute_spec)
        assert v_low - v_missing == pytest.approx(0.48)

    def test_status_quo_is_not_a_shared_alternative(self, noncommute_spec, noncommute_estimates):
        with pytest.raises(ValidationError):
            systematic_utility_ehub(SQ, make_task(), persona(), noncommute_estimates, noncommute_spec)


class TestRandomOffset:
    def test_zero_sigmas(self, noncommute_spec, noncommute_estimates):
        zeroed = noncommute_estimates.with_values(
            {"sigma_shared": 0.0, "sigma_sev": 0.0, "sigma_seb": 0.0}
        )
        for alt in (SQ, SEV, SEB):
            assert random_utility_offset(alt, [1.0, 1.0, 1.0], zeroed, noncommute_spec) == 0.0

    def test_sev_offset_composition(self, noncommute_spec, noncommute_estimates):
        # component order: shared, sev, seb
        value = random_utility_offset(SEV, [1.0, 1.0, 0.0], noncommute_estimates, noncommute_spec)
        assert value == pytest.approx(1.64 + 1.28, abs=1e-12)
        assert value == pytest.approx(2.92, abs=1e-9)

    def test_negative_sigma_taken_absolute(self, commute_spec, commute_estimates):
        assert commute_estimates["sigma_sev"] == -1.11
        value = random_utility_offset(SEV, [0.0, 1.0, 0.0], commute_estimates, commute_spec)
        assert value == pytest.approx(1.11)

    def test_status_quo_never_receives_offset(self, noncommute_spec, noncommute_estimates):
        assert random_utility_offset(SQ, [3.0, -2.0, 1.0], noncommute_estimates, noncommute_spec) == 0.0

    def test_dimension_mismatch(self, noncommute_spec, noncommute_estimates):
        with pytest.raises(ValidationError):
            random_utility_offset(SEV, [1.0, 1.0], noncommute_estimates, noncommute_spec)


class TestCongestionCovariate:
    def test_noncommute_product(self):
        assert build_congestion_covariate(
            DatasetKind.NONCOMMUTE, 0.4, 0.5, 10.0
        ) == pytest.approx(0.20)

    def test_commute_product(self):
        assert build_congestion_covariate(DatasetKind.COMMUTE, 0.2, 10.0, 12.0) == pytest.approx(2.0)

    def test_zero_chance(self):
        for kind in DatasetKind:
            assert build_congestion_covariate(kind, 0.0, 0.0, 10.0) == 0.0

    def test_noncommute_needs_positive_travel_time(self):
        with pytest.raises(ValidationError):
            build_congestion_covariate(DatasetKind.NONCOMMUTE, 0.4, 0.5, 0.0)


class TestAvailability:
    def test_shared_alternatives_always_available(self):
        obs = make_task(sq_mode=CurrentMode.CAR)
        for mode in CurrentMode:
            assert availability(obs, SEV, persona(mode=mode))
            assert availability(obs, SEB, persona(mode=mode))

    def test_own_status_quo_available(self):
        obs = make_task(sq_mode=CurrentMode.CAR)
        assert availability(obs, SQ, persona(mode=CurrentMode.CAR))

    def test_other_mode_status_quo_unavailable(self):
        obs = make_task(sq_mode=CurrentMode.CAR)
        assert not availability(obs, SQ, persona(mode=CurrentMode.BIKE))


class TestInvariants:
    @settings(max_examples=30, deadline=None)
    @given(factor=st.floats(min_value=-3, max_value=3, allow_nan=False))
    def test_utility_linear_in_parameters(self, factor, noncommute_spec, noncommute_estimates):
        obs = make_task(
            attributes={
                SQ: AttributeBundle(travel_time_min=10, travel_cost_eur=1, parking_fee_eur=3),
                SEV: AttributeBundle(travel_time_min=10, travel_cost_eur=2.5,
                                     access_egress_time_min=10),
            }
        )
        p = persona()
        scaled = noncommute_estimates.scaled(factor)
        for alt in (SEV, SEB):
            base = systematic_utility_ehub(alt, obs, p, noncommute_estimates, noncommute_spec)
            assert systematic_utility_ehub(alt, obs, p, scaled, noncommute_spec) == pytest.approx(
                factor * base, abs=1e-9
            )
        base_sq = systematic_utility_sq(obs, p, noncommute_estimates, noncommute_spec)
        assert systematic_utility_sq(obs, p, scaled, noncommute_spec) == pytest.approx(
            factor * base_sq, abs=1e-9
        )
        offset = random_utility_offset(SEV, [1.0, -0.5, 0.2], noncommute_estimates, noncommute_spec)
        assert random_utility_offset(
            SEV, [1.0, -0.5, 0.2], scaled, noncommute_spec
        ) == pytest.approx(abs(factor) * offset, abs=1e-9)

    def test_every_table_row_resolves_once(self, noncommute_spec, noncommute_estimates):
        assert set(noncommute_spec.coefficient_names) == set(noncommute_estimates.names)
        assert len(noncommute_spec.coefficient_names) == 44

    def test_commute_parameter_count(self, commute_spec, commute_estimates):
        assert set(commute_spec.coefficient_names) == set(commute_estimates.names)
        assert len(commute_spec.coefficient_names) == 31

    def test_bundled_p_values_cover_every_coefficient(self):
        from modeswitch import presets

        for kind in DatasetKind:
            estimates = presets.bundled_estimates(kind)
            p_values = presets.bundled_p_values(kind)
            assert set(p_values) == set(estimates.names)
            assert all(0.0 <= p <= 1.0 for p in p_values.values())


class TestParameterVector:
    def test_free_and_fixed_bookkeeping(self):
        params = ParameterVector({"a": 1.0, "b": 2.0, "c": 3.0}, fixed=frozenset({"b"}))
        assert params.free_names == ("a", "c")
        assert params.n_free == 2
        updated = params.with_free_array(np.array([10.0, 30.0]))
        assert updated["a"] == 10.0 and updated["b"] == 2.0 and updated["c"] == 30.0

    def test_unknown_update_rejected(self):
        params = ParameterVector({"a": 1.0})
        with pytest.raises(SpecificationError):
            params.with_values({"zzz": 1.0})

    def test_fixed_flag_must_reference_known_name(self):
        with pytest.raises(SpecificationError):
            ParameterVector({"a": 1.0}, fixed=frozenset({"nope"}))
