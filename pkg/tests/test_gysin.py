from __future__ import annotations

from fractions import Fraction

import pytest

from equicart.algebra import Polynomial, RationalFunction
from equicart.duality import duality_check, pairing_matrix
from equicart.gcomplex import (
    cartan_differential,
    cohomology_hilbert,
    element,
    named_cocycle_element,
    underlying_cohomology_dims,
    validate_model,
)
from equicart.gysin import (
    DecompositionError,
    MapStructureError,
    ModelMap,
    ObstructionError,
    adjunction_residuals,
    compose_maps,
    gysin_localized,
    identity_map,
    projection_formula_check,
    pullback_cohomology,
    pullback_element,
    restrict_map,
    restrict_subtorus,
    thom_extend,
    validate_map,
)
from equicart.models import (
    builtin,
    builtin_map,
    builtin_maps,
    circle_free,
    s2_chain,
    s2_rotation,
)

U = Polynomial.variable(1, 0)


def rf(value, rank=1):
    return RationalFunction.coerce(value, rank)


# -- map validation -------------------------------------------------------------


@pytest.mark.parametrize("name", ["point_identity", "s2_identity",
                                  "s2_north_inclusion", "s2_south_inclusion",
                                  "s2_to_point"])
def test_builtin_maps_are_valid(name):
    report = validate_map(builtin_map(name))
    assert report.ok, str(report)


def test_map_shape_mismatch_is_structural():
    chain = s2_chain()
    with pytest.raises(MapStructureError):
        ModelMap(
            name="bad_shape",
            source=chain.point,
            target=chain.sphere,
            pullback=((Fraction(1),),),  # needs 1 x 8
        )


def test_nonequivariant_pullback_is_witnessed():
    # q -> one breaks contraction-commutation at s; dq -> one breaks both
    # the degree law and d-commutation at q
    chain = s2_chain()
    rows = [[Fraction(0)] * 8]
    rows[0][0] = Fraction(1)
    rows[0][2] = Fraction(1)
    rows[0][4] = Fraction(1)
    bad = ModelMap(
        name="bad_map",
        source=chain.point,
        target=chain.sphere,
        pullback=tuple(tuple(r) for r in rows),
    )
    report = validate_map(bad)
    assert not report.ok
    laws = {issue.law for issue in report.issues}
    assert "pullback has degree 0" in laws
    assert "pullback commutes with d" in laws
    assert "pullback commutes with c_1" in laws
    assert "violation" in str(report)


def test_commutation_violation_names_the_generator():
    # pull t back to nothing but dt to the unit: breaks d-commutation at t
    chain = s2_chain()
    rows = [[Fraction(0)] * 8]
    rows[0][0] = Fraction(1)
    rows[0][3] = Fraction(1)  # dt -> one, degree-violating and d-breaking
    bad = ModelMap(
        name="bad_dt",
        source=chain.point,
        target=chain.sphere,
        pullback=tuple(tuple(r) for r in rows),
    )
    report = validate_map(bad)
    d_issues = [i for i in report.issues if i.law == "pullback commutes with d"]
    assert any(issue.where == "t" for issue in d_issues)


def test_compose_requires_matching_endpoints():
    north = builtin_map("s2_north_inclusion")
    fresh_identity = identity_map(s2_rotation())  # distinct instance
    with pytest.raises(MapStructureError):
        compose_maps(north, fresh_identity)


def test_composition_of_builtin_chain():
    maps = builtin_maps()
    loop = compose_maps(maps["s2_to_point"], maps["s2_north_inclusion"])
    assert validate_map(loop).ok
    assert loop.source is maps["s2_north_inclusion"].source
    assert loop.target is maps["s2_to_point"].target


# -- pullbacks ------------------------------------------------------------------


def test_pullback_cohomology_of_north_inclusion():
    north = builtin_map("s2_north_inclusion")
    matrix = pullback_cohomology(north)
    # rows: source (point) classes; columns: target (s2) classes one, w
    assert (matrix.rows, matrix.cols) == (1, 2)
    assert matrix[0, 0] == rf(1)
    assert matrix[0, 1] == rf(U)


def test_pullback_cohomology_of_south_inclusion():
    south = builtin_map("s2_south_inclusion")
    matrix = pullback_cohomology(south)
    assert matrix[0, 1] == rf(-U)


def test_pullback_element_is_a_ring_map_on_samples():
    north = builtin_map("s2_north_inclusion")
    s2 = north.target
    w = named_cocycle_element(s2, "w")
    pulled = pullback_element(north, w)
    assert pulled == element(north.source, {"one": 1}).scaled(U)


# -- Gysin morphisms ---------------------------------------------------------------


def test_gysin_north_inclusion():
    gysin = gysin_localized(builtin_map("s2_north_inclusion"))
    assert gysin.degree_shift == -2
    assert gysin.source_basis == ("one",)
    assert gysin.target_basis == ("one", "w")
    assert gysin.matrix[0, 0] == rf(Polynomial(1, {(1,): Fraction(1, 2)}))
    assert gysin.matrix[1, 0] == rf(Fraction(1, 2))


def test_gysin_south_inclusion():
    gysin = gysin_localized(builtin_map("s2_south_inclusion"))
    assert gysin.matrix[0, 0] == rf(Polynomial(1, {(1,): Fraction(-1, 2)}))
    assert gysin.matrix[1, 0] == rf(Fraction(1, 2))


def test_gysin_collapse_integrates_over_the_fiber():
    gysin = gysin_localized(builtin_map("s2_to_point"))
    assert gysin.degree_shift == 2
    assert gysin.matrix[0, 0] == rf(0)
    assert gysin.matrix[0, 1] == rf(2)


def test_gysin_of_identity_is_identity():
    gysin = gysin_localized(builtin_map("s2_identity"))
    assert gysin.matrix[0, 0] == rf(1)
    assert gysin.matrix[1, 1] == rf(1)
    assert gysin.matrix[0, 1] == rf(0)
    assert gysin.matrix[1, 0] == rf(0)


def test_gysin_functoriality_collapse_after_inclusion():
    maps = builtin_maps()
    loop = compose_maps(maps["s2_to_point"], maps["s2_north_inclusion"])
    gysin = gysin_localized(loop)
    assert (gysin.matrix.rows, gysin.matrix.cols) == (1, 1)
    assert gysin.matrix[0, 0] == rf(1)


def test_self_intersection_reproduces_the_tangent_euler_class():
    from equicart.euler import euler_linear

    north = builtin_map("s2_north_inclusion")
    gysin = gysin_localized(north)
    pullback = pullback_cohomology(north)
    # i^* i_!(1) = sum_k pullback[0, k] * gysin[k, 0]
    value = sum(
        (pullback[0, k] * gysin.matrix[k, 0] for k in range(2)),
        rf(0),
    )
    # normal data of the embedded point: the tangent representation stored
    # at the corresponding fixed point of the sphere
    tangent = north.target.fixed_points[0].tangent
    assert value == rf(euler_linear(tangent))


@pytest.mark.parametrize("name", ["point_identity", "s2_identity",
                                  "s2_north_inclusion", "s2_south_inclusion",
                                  "s2_to_point"])
def test_adjunction_residuals_vanish(name):
    f = builtin_map(name)
    gysin = gysin_localized(f)
    for _, _, residual in adjunction_residuals(f, gysin):
        assert residual.is_zero


def test_gysin_to_torsion_target_has_empty_basis():
    model = circle_free()
    f = identity_map(model)
    gysin = gysin_localized(f)
    assert gysin.matrix.rows == 0
    assert gysin.matrix.cols == 0
    assert adjunction_residuals(f, gysin) == []


def test_gysin_refuses_degenerate_duality():
    import dataclasses

    broken = dataclasses.replace(
        s2_rotation(), integration={6: Fraction(0), 7: Fraction(0)}
    )
    with pytest.raises(DecompositionError):
        gysin_localized(identity_map(broken))


# -- projection formula ------------------------------------------------------------


@pytest.mark.parametrize("name", ["s2_identity", "s2_north_inclusion",
                                  "s2_south_inclusion", "s2_to_point"])
def test_projection_formula(name):
    report = projection_formula_check(builtin_map(name))
    assert report.ok, str(report)
    assert report.entries


def test_projection_formula_report_text():
    report = projection_formula_check(builtin_map("s2_to_point"))
    assert "all zero" in str(report)


# -- Thom-style extensions ------------------------------------------------------------


def test_extending_the_volume_form_recovers_the_named_cocycle():
    model = s2_rotation()
    vol = element(model, {"vol": 1})
    extended = thom_extend(model, vol)
    assert extended == named_cocycle_element(model, "w")
    assert cartan_differential(model, extended).is_zero


def test_extending_the_weighted_plane_top_class():
    model = builtin("c_alpha(1,0;0,1)")
    top = [g.name for g in model.generators if g.degree == model.top_degree]
    assert len(top) == 1
    extended = thom_extend(model, element(model, {top[0]: 1}))
    assert extended == named_cocycle_element(model, "thom")


def test_extension_rejects_bad_inputs():
    model = s2_rotation()
    with pytest.raises(ValueError):
        thom_extend(model, element(model, {"s": 1}))  # not d-closed
    with pytest.raises(ValueError):
        thom_extend(model, element(model, {"one": 1, "s": 1}))  # mixed degree
    with pytest.raises(ValueError):
        thom_extend(model, element(model, {"vol": U}))  # non-constant coefficient


def test_obstructed_extension_names_the_degree():
    model = builtin("obstruction_pair")
    top = element(model, {"a": 1})
    with pytest.raises(ObstructionError) as info:
        thom_extend(model, top)
    assert info.value.component_degree == -1


# -- torus restriction ---------------------------------------------------------------


def test_restricting_the_two_torus_to_its_acting_circle():
    model = builtin("rema_adj")
    restricted = restrict_subtorus(model, [[0], [1]])
    assert restricted.torus_rank == 1
    assert validate_model(restricted).ok
    reference = circle_free()
    assert restricted.d == reference.d
    assert restricted.contractions == reference.contractions
    assert cohomology_hilbert(restricted, 6) == cohomology_hilbert(reference, 6)


def test_restriction_to_rank_zero_gives_underlying_cohomology():
    model = s2_rotation()
    plain = restrict_subtorus(model, [[]])
    assert plain.torus_rank == 0
    assert validate_model(plain).ok
    assert cohomology_hilbert(plain, 2) == underlying_cohomology_dims(model)
    # the volume class survives with its polynomial part truncated
    assert set(plain.named_cocycles["w"]) == {6}
    north = plain.fixed_points[0]
    assert north.tangent.trivial_real_multiplicity == 2
    assert north.tangent.weights == ()


def test_restriction_along_a_diagonal_embedding():
    model = builtin("rema_adj")
    restricted = restrict_subtorus(model, [[1], [1]])
    assert restricted.torus_rank == 1
    assert validate_model(restricted).ok


def test_restriction_transports_tangent_weights():
    from equicart.euler import Weight

    model = builtin("c_alpha(1,0;0,1)")
    restricted = restrict_subtorus(model, [[1], [0]])
    tangent = restricted.fixed_points[0].tangent
    # the (0,1) weight dies into the trivial part, the (1,0) weight survives
    assert tangent.trivial_real_multiplicity == 2
    assert tangent.weights == ((Weight((1,)), 1),)
    assert tangent.real_dimension == model.fixed_points[0].tangent.real_dimension


def test_restriction_matrix_shape_errors():
    model = s2_rotation()
    with pytest.raises(ValueError):
        restrict_subtorus(model, [])
    with pytest.raises(ValueError):
        restrict_subtorus(builtin("rema_adj"), [[1], [1, 0]])


def test_restriction_commutes_with_gysin_for_the_identity_reparametrization():
    north = builtin_map("s2_north_inclusion")
    restricted = restrict_map(north, [[1]])
    assert validate_map(restricted).ok
    gysin = gysin_localized(restricted)
    reference = gysin_localized(north)
    assert gysin.matrix[0, 0] == reference.matrix[0, 0]
    assert gysin.matrix[1, 0] == reference.matrix[1, 0]


def test_restriction_commutes_with_gysin_for_the_circle_flip():
    # u |-> -v: the localized pushforward transports by the same substitution
    north = builtin_map("s2_north_inclusion")
    flipped = restrict_map(north, [[-1]])
    assert validate_map(flipped).ok
    gysin = gysin_localized(flipped)
    assert gysin.matrix[0, 0] == rf(Polynomial(1, {(1,): Fraction(-1, 2)}))
    assert gysin.matrix[1, 0] == rf(Fraction(1, 2))


def test_restrict_map_keeps_the_pullback_matrix():
    collapse = builtin_map("s2_to_point")
    restricted = restrict_map(collapse, [[-1]])
    assert restricted.pullback == collapse.pullback
    assert restricted.source.torus_rank == 1
