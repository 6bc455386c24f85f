from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from equicart.algebra import Polynomial, RationalFunction, rank_rational
from equicart.gcomplex import (
    EquivariantElement,
    Generator,
    InvariantModel,
    MissingProductError,
    ModelStructureError,
    cartan_differential,
    cohomology_generic,
    cohomology_hilbert,
    element,
    element_product,
    evaluate_at_point,
    named_cocycle_element,
    predict_free_hilbert,
    scale_contractions,
    underlying_cohomology_dims,
    validate_model,
)
from equicart.models import (
    builtin_names,
    builtin,
    circle_free,
    circle_trivial,
    point,
    s2_rotation,
)

U = Polynomial.variable(1, 0)


def _all_builtins():
    names = ["point(1)", "point(2)", "circle_trivial(1)", "circle_free",
             "rema_adj", "s2_rotation", "obstruction_pair",
             "c_alpha(1)", "c_alpha(1,0;0,1)", "c_alpha(1;1)"]
    return [builtin(name) for name in names]


# -- structural validation --------------------------------------------------


@pytest.mark.parametrize("model", _all_builtins(), ids=lambda m: m.name)
def test_builtins_satisfy_all_axioms(model):
    report = validate_model(model)
    assert report.ok, str(report)


def test_shape_mismatch_rejected_before_axioms():
    with pytest.raises(ModelStructureError):
        InvariantModel(
            name="bad",
            torus_rank=1,
            generators=(Generator("one", 0),),
            d=((Fraction(0), Fraction(0)),),  # not 1x1
            contractions=(((Fraction(0),),),),
            top_degree=0,
        )


def test_anticommutation_violation_is_witnessed():
    # d(t) = dt and c(dt) = t: (d o c + c o d)(t) = t
    model = InvariantModel(
        name="bad_anticommute",
        torus_rank=1,
        generators=(Generator("t", 1), Generator("dt", 2)),
        d=((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0))),
        contractions=(((Fraction(0), Fraction(1)), (Fraction(0), Fraction(0))),),
        top_degree=2,
    )
    report = validate_model(model)
    assert not report.ok
    axioms = {issue.axiom for issue in report.issues}
    assert axioms == {"d o c + c o d = 0"}
    assert any("t" in issue.witness for issue in report.issues)


def test_contraction_degree_violation_is_witnessed():
    # c(one) = a raises degree instead of lowering it
    model = InvariantModel(
        name="bad_degree",
        torus_rank=1,
        generators=(Generator("one", 0), Generator("a", 1)),
        d=((Fraction(0), Fraction(0)), (Fraction(0), Fraction(0))),
        contractions=(((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0))),),
        top_degree=1,
    )
    report = validate_model(model)
    assert any(issue.axiom == "c_1 has degree -1" for issue in report.issues)


def test_contraction_anticommutation_between_variables():
    # c1(x) = y, c2(y) = z: (c1 c2 + c2 c1)(x) = z
    zero3 = tuple(tuple(Fraction(0) for _ in range(3)) for _ in range(3))
    c1 = ((Fraction(0),) * 3, (Fraction(0), Fraction(0), Fraction(1)),
          (Fraction(0),) * 3)
    c2 = ((Fraction(0), Fraction(1), Fraction(0)), (Fraction(0),) * 3,
          (Fraction(0),) * 3)
    model = InvariantModel(
        name="bad_cc",
        torus_rank=2,
        generators=(Generator("z", 0), Generator("y", 1), Generator("x", 2)),
        d=zero3,
        contractions=(c1, c2),
        top_degree=2,
    )
    report = validate_model(model)
    assert any(
        issue.axiom == "c_i o c_j + c_j o c_i = 0" for issue in report.issues
    )


# -- the Cartan differential ---------------------------------------------------


@st.composite
def s2_elements(draw):
    model = s2_rotation()
    terms = {}
    for idx in draw(st.lists(st.integers(0, 7), max_size=4, unique=True)):
        exp = draw(st.integers(0, 3))
        num = draw(st.integers(-5, 5))
        if num:
            terms[idx] = Polynomial(1, {(exp,): Fraction(num)})
    return model, EquivariantElement(model, terms)


@given(s2_elements())
def test_cartan_differential_squares_to_zero(pair):
    model, x = pair
    assert cartan_differential(model, cartan_differential(model, x)).is_zero


@given(s2_elements(), s2_elements())
def test_cartan_differential_additive(pair_a, pair_b):
    model, a = pair_a
    _, b = pair_b
    b = EquivariantElement(model, dict(b.terms))
    left = cartan_differential(model, a + b)
    right = cartan_differential(model, a) + cartan_differential(model, b)
    assert left == right


def test_cartan_differential_on_each_generator_matches_matrices():
    model = s2_rotation()
    d_t = cartan_differential(model, element(model, {"t": 1}))
    assert d_t == element(model, {"dt": 1})
    d_s = cartan_differential(model, element(model, {"s": 1}))
    # d(s) = tvol plus the contraction term u * q
    assert d_s == EquivariantElement(model, {7: Polynomial.one(1), 2: U})


# -- products -------------------------------------------------------------------


def test_unit_law_in_product_table():
    model = s2_rotation()
    unit = element(model, {"one": 1})
    for gen in model.generators:
        x = element(model, {gen.name: 1})
        assert element_product(model, unit, x) == x


def test_missing_product_is_a_named_error():
    model = s2_rotation()
    t = element(model, {"t": 1})
    q = element(model, {"q": 1})
    with pytest.raises(MissingProductError) as info:
        element_product(model, t, q)
    assert info.value.left == "t"
    assert info.value.right == "q"


def test_graded_swap_sign_for_odd_generators():
    model = s2_rotation()
    t = element(model, {"t": 1})
    vol = element(model, {"vol": 1})
    # t and vol commute (degree 0 times degree 2)
    assert element_product(model, t, vol) == element_product(model, vol, t)


def test_volume_square_is_exact():
    model = s2_rotation()
    w = named_cocycle_element(model, "w")
    w_squared = element_product(model, w, w)
    u_squared_unit = EquivariantElement(model, {0: U * U})
    primitive = EquivariantElement(model, {5: 2 * U})  # 2u tensor s
    assert w_squared - u_squared_unit == cartan_differential(model, primitive)


def test_evaluate_at_fixed_points():
    model = s2_rotation()
    w = named_cocycle_element(model, "w")
    north, south = model.fixed_points
    assert evaluate_at_point(w, north) == U
    assert evaluate_at_point(w, south) == -U


# -- cohomology ------------------------------------------------------------------


def _brute_force_hilbert(model, cutoff):
    """Independent enumeration: assemble the degree-k slices of the Cartan
    complex from scratch and take ranks over Q."""
    n = model.torus_rank

    def monomials_of(j):
        if n == 0:
            return [()] if j == 0 else []
        out = []

        def rec(prefix, remaining, slots):
            if slots == 1:
                out.append(prefix + (remaining,))
                return
            for v in range(remaining + 1):
                rec(prefix + (v,), remaining - v, slots - 1)

        rec((), j, n)
        return out

    def basis(k):
        out = []
        for j in range(k // 2 + 1):
            for exps in monomials_of(j):
                for idx, gen in enumerate(model.generators):
                    if gen.degree == k - 2 * j:
                        out.append((exps, idx))
        return out

    def matrix(k):
        rows_basis = basis(k + 1)
        cols_basis = basis(k)
        index = {key: r for r, key in enumerate(rows_basis)}
        rows = [[Fraction(0)] * len(cols_basis) for _ in rows_basis]
        for c, (exps, g) in enumerate(cols_basis):
            for h in range(len(model.generators)):
                if model.d[h][g] != 0:
                    rows[index[(exps, h)]][c] += model.d[h][g]
            for i in range(n):
                bumped = tuple(
                    e + (1 if pos == i else 0) for pos, e in enumerate(exps)
                )
                for h in range(len(model.generators)):
                    if model.contractions[i][h][g] != 0:
                        rows[index[(bumped, h)]][c] += model.contractions[i][h][g]
        return rows, len(cols_basis)

    dims = []
    previous_rank = 0
    for k in range(cutoff + 1):
        rows, dim = matrix(k)
        rank = rank_rational(rows) if rows and dim else 0
        dims.append(dim - rank - previous_rank)
        previous_rank = rank
    return dims


@pytest.mark.parametrize(
    "model",
    [point(1), circle_free(), circle_trivial(1), s2_rotation(), builtin("rema_adj")],
    ids=lambda m: m.name,
)
def test_hilbert_table_matches_independent_enumeration(model):
    cutoff = 8
    assert cohomology_hilbert(model, cutoff) == _brute_force_hilbert(model, cutoff)


def test_hilbert_oracles():
    assert cohomology_hilbert(point(1), 6) == [1, 0, 1, 0, 1, 0, 1]
    assert cohomology_hilbert(circle_free(), 6) == [1, 0, 0, 0, 0, 0, 0]
    assert cohomology_hilbert(s2_rotation(), 8) == [1, 0, 2, 0, 2, 0, 2, 0, 2]
    assert cohomology_hilbert(circle_trivial(1), 5) == [1, 1, 1, 1, 1, 1]


def test_generic_ranks_and_representatives():
    generic = cohomology_generic(s2_rotation())
    assert (generic.even_rank, generic.odd_rank) == (2, 0)
    assert generic.names() == ["one", "w"]

    assert cohomology_generic(circle_free()).total_rank == 0
    trivial = cohomology_generic(circle_trivial(1))
    assert (trivial.even_rank, trivial.odd_rank) == (1, 1)


def test_named_cocycles_must_be_independent_to_be_used():
    base = s2_rotation()
    doubled = {
        "one": {0: Polynomial.one(1)},
        "also_one": {0: 2 * Polynomial.one(1)},
    }
    import dataclasses

    model = dataclasses.replace(base, named_cocycles=doubled, fixed_points=())
    generic = cohomology_generic(model)
    # the dependent named set is rejected; computed representatives appear
    assert (generic.even_rank, generic.odd_rank) == (2, 0)
    assert generic.names() != ["one", "also_one"]


def test_underlying_dims():
    assert underlying_cohomology_dims(s2_rotation()) == [1, 0, 1]
    assert underlying_cohomology_dims(circle_free()) == [1, 1]
    assert underlying_cohomology_dims(point(2)) == [1]


def test_free_prediction_flags_collapse():
    stable = predict_free_hilbert(s2_rotation())
    assert stable.matches and stable.flag is None

    collapsed = predict_free_hilbert(circle_free())
    assert not collapsed.matches
    assert collapsed.flag is not None
    assert collapsed.predicted[2] == 1 and collapsed.actual[2] == 0


def test_contraction_scaling_preserves_cohomology():
    model = s2_rotation()
    scaled = scale_contractions(model, Fraction(3))
    assert validate_model(scaled).ok
    assert cohomology_hilbert(scaled, 8) == cohomology_hilbert(model, 8)
    a = cohomology_generic(scaled)
    b = cohomology_generic(model)
    assert (a.even_rank, a.odd_rank) == (b.even_rank, b.odd_rank)


def test_element_lookup_by_name_and_index():
    model = s2_rotation()
    by_name = element(model, {"t": Fraction(1, 2)})
    by_index = element(model, {1: Fraction(1, 2)})
    assert by_name == by_index
    with pytest.raises(KeyError):
        element(model, {"missing": 1})


def test_total_degree():
    model = s2_rotation()
    w = named_cocycle_element(model, "w")
    assert w.total_degree() == 2
    mixed = element(model, {"one": 1, "t": 1}) + EquivariantElement(
        model, {6: Polynomial.one(1)}
    )
    assert mixed.total_degree() is None
