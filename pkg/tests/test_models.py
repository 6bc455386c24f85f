from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import pytest

from equicart.algebra import Polynomial
from equicart.duality import duality_check
from equicart.euler import Weight, euler_linear, localization_consistency
from equicart.gcomplex import (
    cohomology_hilbert,
    element,
    element_product,
    named_cocycle_element,
    validate_model,
)
from equicart.gysin import validate_map
from equicart.models import (
    ModelFileError,
    UnknownModelError,
    builtin,
    builtin_map,
    builtin_map_names,
    builtin_names,
    c_alpha,
    load_model,
    load_model_file,
    model_to_dict,
    point,
    resolve_model,
    s2_rotation,
    save_model,
    tensor_product,
)

FIXTURES = Path(__file__).parent / "fixtures"

ALL_BUILTINS = ["point(1)", "point(2)", "circle_trivial(1)", "circle_trivial(2)",
                "circle_free", "rema_adj", "s2_rotation", "obstruction_pair",
                "c_alpha(1)", "c_alpha(2)", "c_alpha(1,0;0,1)", "c_alpha(1;1)"]


# -- the builtin catalogue ----------------------------------------------------


def test_builtin_selector_defaults():
    assert builtin("point") == point(1)
    assert builtin("point(3)").torus_rank == 3
    assert builtin("circle_trivial") == builtin("circle_trivial(1)")
    assert builtin("s2_rotation") == s2_rotation()


def test_builtin_selector_whitespace_tolerant():
    assert builtin(" c_alpha( 1 , 0 ; 0 , 1 ) ") == builtin("c_alpha(1,0;0,1)")


def test_unknown_builtin_lists_the_catalogue():
    with pytest.raises(UnknownModelError) as info:
        builtin("klein_bottle")
    message = str(info.value)
    for name in builtin_names():
        assert name in message


def test_builtin_argument_validation():
    # rank 0 is legal: the ordinary, nonequivariant complex of a point
    assert builtin("point(0)").torus_rank == 0
    with pytest.raises(UnknownModelError):
        builtin("point(x)")
    with pytest.raises(UnknownModelError):
        builtin("circle_free(2)")  # takes no arguments
    with pytest.raises(UnknownModelError):
        builtin("c_alpha()")
    with pytest.raises(UnknownModelError):
        builtin("c_alpha(1,0;1)")  # ragged weight rows
    with pytest.raises(UnknownModelError):
        builtin("c_alpha(0)")  # zero weight is not allowed


def test_c_alpha_rejects_zero_weight_directly():
    with pytest.raises(ValueError):
        c_alpha([[0, 0]])


@pytest.mark.parametrize("name", ALL_BUILTINS)
def test_every_builtin_is_self_certifying(name):
    model = builtin(name)
    report = validate_model(model)
    assert report.ok, str(report)
    if model.compact:
        assert duality_check(model).perfect
    if model.fixed_points and model.compact:
        for item in localization_consistency(model):
            assert item.ok


@pytest.mark.parametrize("name", builtin_map_names())
def test_every_builtin_map_is_valid(name):
    assert validate_map(builtin_map(name)).ok


def test_builtin_map_unknown_name():
    with pytest.raises(UnknownModelError):
        builtin_map("mystery_map")


# -- tensor products -----------------------------------------------------------


def test_tensor_product_of_weighted_planes_is_valid():
    a = builtin("c_alpha(1)")
    b = builtin("c_alpha(2)")
    prod = tensor_product(a, b)
    assert validate_model(prod).ok
    assert prod.torus_rank == 1
    assert prod.top_degree == a.top_degree + b.top_degree


def test_tensor_product_koszul_sign_in_the_differential():
    model = builtin("c_alpha(1;1)")
    names = [g.name for g in model.generators]
    dh_h, h_dh, dh_dh = (names.index(k) for k in ("dh.h", "h.dh", "dh.dh"))
    # d(dh x h) = -dh x dh, d(h x dh) = +dh x dh
    assert model.d[dh_dh][dh_h] == Fraction(-1)
    assert model.d[dh_dh][h_dh] == Fraction(1)
    # a square of an odd factor is declared zero
    left = element(model, {dh_h: 1})
    assert element_product(model, left, left).is_zero


def test_tensor_product_integration_is_multiplicative():
    from equicart.duality import integrate

    a = builtin("c_alpha(1)")
    model = tensor_product(a, a)
    top = [g for g in model.generators if g.degree == model.top_degree]
    assert len(top) == 1
    value = integrate(model, element(model, {top[0].name: 1}))
    assert value == Polynomial.one(1) or value == Fraction(1)


def test_weighted_plane_thom_class_restricts_to_the_euler_class():
    for spec in ["c_alpha(1)", "c_alpha(3)", "c_alpha(1,0;0,1)", "c_alpha(1;1)"]:
        model = builtin(spec)
        origin = model.fixed_points[0]
        assert origin.restrictions["thom"] == euler_linear(origin.tangent)


def test_weighted_plane_hilbert_shifts_with_total_weight_count():
    assert cohomology_hilbert(builtin("c_alpha(1)"), 4) == [0, 0, 1, 0, 1]
    assert cohomology_hilbert(builtin("c_alpha(1;1)"), 6) == [0, 0, 0, 0, 1, 0, 1]


# -- serialization ----------------------------------------------------------------


@pytest.mark.parametrize("name", ALL_BUILTINS)
def test_save_load_save_is_byte_identical(name, tmp_path):
    model = builtin(name)
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    save_model(model, first)
    reloaded = load_model(first)
    assert reloaded == model
    save_model(reloaded, second)
    assert first.read_bytes() == second.read_bytes()


def test_saved_file_is_sorted_json_with_schema_version(tmp_path):
    path = tmp_path / "m.json"
    save_model(s2_rotation(), path)
    data = json.loads(path.read_text())
    assert data["schema_version"] == 1
    assert path.read_text() == json.dumps(data, sort_keys=True, indent=2) + "\n"


def test_declared_zero_products_survive_round_trip(tmp_path):
    from equicart.gcomplex import MissingProductError

    path = tmp_path / "m.json"
    save_model(s2_rotation(), path)
    model = load_model(path)
    # (s, s) is declared zero: multiplying must succeed and give zero
    s = element(model, {"s": 1})
    assert element_product(model, s, s).is_zero
    # (t, q) is genuinely absent: multiplying must still raise
    with pytest.raises(MissingProductError):
        element_product(model, element(model, {"t": 1}), element(model, {"q": 1}))


def test_map_round_trip_with_self_and_builtin_endpoints(tmp_path):
    path = tmp_path / "m.json"
    sphere = s2_rotation()
    maps = {
        "identity": builtin_map("s2_identity"),
        "north": builtin_map("s2_north_inclusion"),
    }
    # re-anchor the maps on the model instance being saved
    from equicart.gysin import ModelMap

    anchored = {
        "identity": ModelMap(
            name="identity", source=sphere, target=sphere,
            pullback=maps["identity"].pullback,
        ),
        "north": ModelMap(
            name="north", source=builtin("point(1)"), target=sphere,
            pullback=maps["north"].pullback,
        ),
    }
    save_model(sphere, path, maps=anchored)
    loaded = load_model_file(path)
    assert loaded.model == sphere
    assert set(loaded.maps) == {"identity", "north"}
    north = loaded.maps["north"]
    assert north.source == builtin("point(1)")
    assert north.target == loaded.model
    assert validate_map(north).ok
    # and the file itself is stable under a second save
    second = tmp_path / "n.json"
    save_model(loaded.model, second, maps=loaded.maps)
    assert path.read_bytes() == second.read_bytes()


def test_foreign_map_endpoints_are_rejected_at_save_time():
    from equicart.gysin import identity_map

    stranger = tensor_product(builtin("c_alpha(1)"), builtin("c_alpha(2)"))
    with pytest.raises(ValueError):
        model_to_dict(s2_rotation(), maps={"bad": identity_map(stranger)})


def test_resolve_model_selectors(tmp_path):
    path = tmp_path / "m.json"
    save_model(builtin("circle_free"), path)
    assert resolve_model(str(path)) == builtin("circle_free")
    assert resolve_model("builtin:circle_free") == builtin("circle_free")
    with pytest.raises(UnknownModelError):
        resolve_model("builtin:no_such_model")
    # a bare name is a path; a missing path surfaces as the usual OS error
    with pytest.raises(FileNotFoundError):
        resolve_model("no_such_model_or_file")


# -- rejection of defective files ---------------------------------------------------


def _expect_rejection(filename: str, *needles: str):
    with pytest.raises(ModelFileError) as info:
        load_model_file(FIXTURES / filename)
    message = str(info.value)
    for needle in needles:
        assert needle in message, f"{needle!r} not in {message!r}"


def test_rejects_broken_differential():
    _expect_rejection("broken_d_squared.json", "d o d = 0", "1*b")


def test_rejects_broken_anticommutation():
    _expect_rejection("broken_anticommute.json", "d o c + c o d = 0")


def test_rejects_unknown_schema_version():
    _expect_rejection("broken_schema_version.json", "schema_version")


def test_rejects_malformed_json_with_position():
    _expect_rejection("broken_parse.json", ":2:11")


def test_rejects_invalid_map():
    _expect_rejection("broken_map.json", "pullback")


def test_rejects_duplicate_matrix_entries():
    _expect_rejection("broken_duplicate_entry.json", "duplicate")


def test_missing_file_surfaces_as_file_not_found():
    with pytest.raises(FileNotFoundError):
        load_model_file(FIXTURES / "no_such_file.json")
