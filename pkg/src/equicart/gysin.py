"""Model maps, pullbacks, localized Gysin morphisms, Thom extension, and
subtorus restriction.

A map of models is carried contravariantly by a degree-0 rational matrix on
generators that commutes with d and with every contraction.  Its Gysin
(wrong-way) morphism is the unique fraction-field matrix adjoint to the
pullback under the two Poincare pairings:

    <f* a_i, b_j>_source = <a_i, X b_j>_target   for all basis pairs,

solved as X = P_target^-1 * F^t * P_source and re-verified entry by entry
against independently computed products and integrals.  Thom extension turns
a closed top form into an equivariant cocycle by solving one rational linear
system per polynomial step; when a contraction image fails to be exact the
obstruction error names the component degree where extension stopped.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .algebra import (
    MatrixF,
    Polynomial,
    RationalFunction,
    matmul,
    rank_and_solve,
    solve_rational,
)
from .duality import Pairing, duality_check, pairing_matrix
from .euler import FixedPointDatum
from .gcomplex import (
    EquivariantElement,
    InvariantModel,
    cartan_differential,
    cartan_parity_matrices,
    cohomology_generic,
    element_product,
    evaluate_at_point,
    zero_element,
)


class MapStructureError(ValueError):
    """Shape or rank problems detected before any commutation check."""


class DecompositionError(RuntimeError):
    """A cocycle failed to decompose in the stored cohomology basis; this
    signals an inconsistent model or an internal bug, not bad user input."""


class ObstructionError(RuntimeError):
    """Thom extension hit a contraction image that is not exact."""

    def __init__(self, component_degree: int, detail: str):
        super().__init__(
            f"extension obstructed at component degree {component_degree}: {detail}"
        )
        self.component_degree = component_degree


@dataclass(frozen=True)
class ModelMap:
    """A map of spaces f: source -> target, stored through its pullback.

    pullback[s][t] is the coefficient of source generator s in the pullback
    of target generator t; the matrix has degree 0 and commutes with d and
    with every contraction (checked by validate_map).
    """

    name: str
    source: InvariantModel
    target: InvariantModel
    pullback: Tuple[Tuple[Fraction, ...], ...]
    proper: bool = True

    def __post_init__(self):
        if self.source.torus_rank != self.target.torus_rank:
            raise MapStructureError(
                f"map {self.name!r}: source rank {self.source.torus_rank} != "
                f"target rank {self.target.torus_rank}"
            )
        s = len(self.source.generators)
        t = len(self.target.generators)
        if len(self.pullback) != s or any(len(row) != t for row in self.pullback):
            raise MapStructureError(
                f"map {self.name!r}: pullback matrix must be {s}x{t}"
            )


def identity_map(model: InvariantModel) -> ModelMap:
    size = len(model.generators)
    matrix = tuple(
        tuple(Fraction(1) if i == j else Fraction(0) for j in range(size))
        for i in range(size)
    )
    return ModelMap(
        name=f"identity:{model.name}", source=model, target=model, pullback=matrix
    )


def compose_maps(second: ModelMap, first: ModelMap) -> ModelMap:
    """The composite (second o first): source of first into target of second;
    pullbacks compose the other way round."""
    if first.target is not second.source:
        raise MapStructureError(
            f"cannot compose {second.name!r} after {first.name!r}: "
            "inner models differ"
        )
    matrix = matmul(first.pullback, second.pullback, Fraction(0))
    return ModelMap(
        name=f"{second.name}*{first.name}",
        source=first.source,
        target=second.target,
        pullback=tuple(tuple(row) for row in matrix),
        proper=first.proper and second.proper,
    )


@dataclass(frozen=True)
class MapIssue:
    law: str
    where: str
    witness: str

    def __str__(self) -> str:
        return f"[{self.law}] at {self.where}: {self.witness}"


@dataclass(frozen=True)
class MapReport:
    map_name: str
    issues: Tuple[MapIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        if self.ok:
            return f"map {self.map_name!r}: pullback commutes with d and all c_i"
        lines = [f"map {self.map_name!r}: {len(self.issues)} violation(s)"]
        lines += [f"  - {issue}" for issue in self.issues]
        return "\n".join(lines)


def _difference_column(matrix_a, matrix_b, col: int, gens) -> str:
    parts = []
    for i in range(len(matrix_a)):
        delta = matrix_a[i][col] - matrix_b[i][col]
        if delta != 0:
            parts.append(f"{delta}*{gens[i].name}")
    return " + ".join(parts) if parts else "0"


def validate_map(f: ModelMap) -> MapReport:
    """Exact matrix identities: degree 0, pullback*d = d*pullback and
    pullback*c_i = c_i*pullback for every i."""
    issues: List[MapIssue] = []
    src, tgt = f.source, f.target
    for s in range(len(src.generators)):
        for t in range(len(tgt.generators)):
            if (
                f.pullback[s][t] != 0
                and src.generators[s].degree != tgt.generators[t].degree
            ):
                issues.append(
                    MapIssue(
                        law="pullback has degree 0",
                        where=f"{tgt.generators[t].name} -> {src.generators[s].name}",
                        witness=(
                            f"degrees {tgt.generators[t].degree} -> "
                            f"{src.generators[s].degree}"
                        ),
                    )
                )

    def commute(target_op, source_op, label: str):
        lhs = matmul(f.pullback, target_op, Fraction(0))
        rhs = matmul(source_op, f.pullback, Fraction(0))
        for t in range(len(tgt.generators)):
            if any(lhs[i][t] != rhs[i][t] for i in range(len(src.generators))):
                issues.append(
                    MapIssue(
                        law=f"pullback commutes with {label}",
                        where=tgt.generators[t].name,
                        witness=_difference_column(lhs, rhs, t, src.generators),
                    )
                )

    commute(tgt.d, src.d, "d")
    for i in range(src.torus_rank):
        commute(tgt.contractions[i], src.contractions[i], f"c_{i + 1}")
    return MapReport(map_name=f.name, issues=tuple(issues))


def pullback_element(f: ModelMap, x: EquivariantElement) -> EquivariantElement:
    """Apply the pullback matrix S(t)-linearly to a target element."""
    if x.model is not f.target:
        raise ValueError("element does not live on the map's target")
    terms: Dict[int, object] = {}
    for t, coeff in x.terms.items():
        for s in range(len(f.source.generators)):
            entry = f.pullback[s][t]
            if entry == 0:
                continue
            add = coeff * entry
            terms[s] = terms[s] + add if s in terms else add
    return EquivariantElement(f.source, terms)


def _parity_of(x: EquivariantElement) -> int:
    parities = {x.model.generators[i].degree % 2 for i in x.terms}
    if len(parities) != 1:
        raise DecompositionError("element mixes parities")
    return parities.pop()


def decompose_in_basis(
    model: InvariantModel,
    basis: Sequence[EquivariantElement],
    x: EquivariantElement,
) -> List[RationalFunction]:
    """Coordinates of [x] in a cohomology basis, modulo Cartan coboundaries,
    over the fraction field.

    Solves x = sum_k coeff_k * basis_k + d_T(y) on the parity slice of x.
    """
    n = model.torus_rank
    zero = RationalFunction.constant(n, 0)
    if x.is_zero:
        return [zero] * len(basis)
    parity = _parity_of(x)
    even, odd, a_eo, a_oe = cartan_parity_matrices(model)
    indices = even if parity == 0 else odd
    boundary = a_oe if parity == 0 else a_eo  # maps INTO this parity
    same_parity = [
        (k, b) for k, b in enumerate(basis) if b.is_zero or _parity_of(b) == parity
    ]
    columns: List[List[RationalFunction]] = []
    for _, b in same_parity:
        columns.append(
            [RationalFunction.coerce(b.coefficient(i), n) for i in indices]
        )
    boundary_cols = len(boundary[0]) if boundary and boundary[0] else 0
    for j in range(boundary_cols):
        columns.append(
            [RationalFunction.coerce(boundary[i][j], n) for i in range(len(indices))]
        )
    rhs = [RationalFunction.coerce(x.coefficient(i), n) for i in indices]
    rows = [[col[i] for col in columns] for i in range(len(indices))]
    result = rank_and_solve(rows, b=rhs, torus_rank=n, cols=len(columns))
    if not result.consistent or result.solution is None:
        raise DecompositionError(
            f"cocycle does not decompose in the basis of {model.name!r}"
        )
    out = [zero] * len(basis)
    for pos, (k, _) in enumerate(same_parity):
        out[k] = result.solution[pos]
    return out


def _matrix_with_shape(rows: List[list], nrows: int, ncols: int) -> MatrixF:
    """MatrixF that keeps explicit dimensions even when one of them is 0."""
    return MatrixF(nrows, ncols, tuple(tuple(row) for row in rows))


def pullback_cohomology(f: ModelMap) -> MatrixF:
    """The matrix of f* between generic cohomology bases: column i holds the
    source-basis coordinates of the pullback of target representative i."""
    source_coh = cohomology_generic(f.source)
    target_coh = cohomology_generic(f.target)
    source_basis = source_coh.elements()
    columns = []
    for rep in target_coh.elements():
        pulled = pullback_element(f, rep)
        columns.append(decompose_in_basis(f.source, source_basis, pulled))
    rows = [
        [columns[j][i] for j in range(len(columns))]
        for i in range(len(source_basis))
    ]
    return _matrix_with_shape(rows, len(source_basis), len(columns))


@dataclass(frozen=True)
class GysinMatrix:
    """f_* on generic cohomology bases, adjoint to the pullback.

    matrix[k][j]: coefficient of target class k in the image of source
    class j.  degree_shift records top(source) - top(target); it is the
    cohomological degree the morphism adds.
    """

    map_name: str
    source_basis: Tuple[str, ...]
    target_basis: Tuple[str, ...]
    matrix: MatrixF
    degree_shift: int


def _invert_pairing(pairing: Pairing, torus_rank: int) -> List[List[RationalFunction]]:
    size = pairing.matrix.rows
    zero = RationalFunction.constant(torus_rank, 0)
    one = RationalFunction.constant(torus_rank, 1)
    rows = pairing.matrix.row_lists()
    inverse: List[List[RationalFunction]] = [[zero] * size for _ in range(size)]
    for j in range(size):
        rhs = [one if i == j else zero for i in range(size)]
        result = rank_and_solve(rows, b=rhs, torus_rank=torus_rank, cols=size)
        if not result.consistent or result.solution is None:
            raise DecompositionError(
                f"pairing of {pairing.model_name!r} is singular; "
                "the model's integration or products are defective"
            )
        for i, value in enumerate(result.solution):
            inverse[i][j] = value
    return inverse


def gysin_localized(f: ModelMap) -> GysinMatrix:
    """Solve the adjunction for f_* and re-verify it independently.

    Both models must be compact with perfect pairings.  A torsion target has
    an empty localized basis; the returned matrix then has zero rows and the
    adjunction holds vacuously.
    """
    n = f.source.torus_rank
    for model in (f.source, f.target):
        report = duality_check(model)
        if not report.perfect:
            raise DecompositionError(
                f"model {model.name!r} fails duality ({report}); "
                "Gysin is not determined"
            )
    source_pairing = pairing_matrix(f.source)
    target_pairing = pairing_matrix(f.target)
    pullback = pullback_cohomology(f)

    zero = RationalFunction.constant(n, 0)
    s_dim = len(source_pairing.names)
    t_dim = len(target_pairing.names)
    if t_dim == 0 or s_dim == 0:
        matrix = _matrix_with_shape([[] for _ in range(t_dim)], t_dim, s_dim)
    else:
        p_t_inv = _invert_pairing(target_pairing, n)
        f_t = [
            [pullback[i, j] for i in range(pullback.rows)] for j in range(pullback.cols)
        ]  # transpose: t_dim x s_dim
        rhs = matmul(f_t, source_pairing.matrix.row_lists(), zero)
        x = matmul(p_t_inv, rhs, zero)
        matrix = _matrix_with_shape(x, t_dim, s_dim)
    gysin = GysinMatrix(
        map_name=f.name,
        source_basis=tuple(source_pairing.names),
        target_basis=tuple(target_pairing.names),
        matrix=matrix,
        degree_shift=f.source.top_degree - f.target.top_degree,
    )
    residuals = adjunction_residuals(f, gysin)
    bad = [entry for entry in residuals if not entry[2].is_zero]
    if bad:
        i, j, value = bad[0]
        raise DecompositionError(
            f"adjunction residual nonzero at basis pair ({i}, {j}): {value}"
        )
    return gysin


def _gysin_image(
    f: ModelMap, gysin: GysinMatrix, target_classes, j: int
) -> EquivariantElement:
    """f_* of source basis class j, as a target element over the fraction
    field."""
    out = zero_element(f.target)
    for k in range(gysin.matrix.rows):
        coeff = gysin.matrix[k, j]
        if coeff.is_zero:
            continue
        out = out + target_classes[k].scaled(coeff)
    return out


def adjunction_residuals(
    f: ModelMap, gysin: GysinMatrix
) -> List[Tuple[int, int, RationalFunction]]:
    """<f* a_i, b_j>_source - <a_i, f_* b_j>_target for every basis pair,
    computed from products and integrals only (independent of the solver)."""
    from .duality import integrate  # local import keeps module init light

    n = f.source.torus_rank
    source_coh = cohomology_generic(f.source)
    target_coh = cohomology_generic(f.target)
    source_classes = source_coh.elements()
    target_classes = target_coh.elements()
    out = []
    for i, alpha in enumerate(target_classes):
        pulled = pullback_element(f, alpha)
        for j, beta in enumerate(source_classes):
            lhs = RationalFunction.coerce(
                integrate(f.source, element_product(f.source, pulled, beta)), n
            )
            pushed = _gysin_image(f, gysin, target_classes, j)
            rhs = RationalFunction.coerce(
                integrate(f.target, element_product(f.target, alpha, pushed)), n
            )
            out.append((i, j, lhs - rhs))
    return out


@dataclass(frozen=True)
class ProjectionFormulaReport:
    map_name: str
    entries: Tuple[Tuple[str, str, Tuple[RationalFunction, ...]], ...]

    @property
    def ok(self) -> bool:
        return all(
            all(value.is_zero for value in residual)
            for _, _, residual in self.entries
        )

    def __str__(self) -> str:
        status = "all zero" if self.ok else "NONZERO RESIDUALS"
        lines = [f"projection formula for {self.map_name!r}: {status}"]
        for alpha, beta, residual in self.entries:
            text = ", ".join(str(v) for v in residual)
            lines.append(f"  ({alpha}, {beta}): [{text}]")
        return "\n".join(lines)


def projection_formula_check(
    f: ModelMap, samples: Optional[Sequence[Tuple[int, int]]] = None
) -> ProjectionFormulaReport:
    """Residuals of f_*(f* a * b) - a * f_*(b) in target-basis coordinates,
    for sampled pairs (a = target class index, b = source class index);
    default samples every basis pair."""
    gysin = gysin_localized(f)
    source_coh = cohomology_generic(f.source)
    target_coh = cohomology_generic(f.target)
    source_classes = source_coh.elements()
    target_classes = target_coh.elements()
    if samples is None:
        samples = [
            (i, j)
            for i in range(len(target_classes))
            for j in range(len(source_classes))
        ]
    entries = []
    for i, j in samples:
        alpha = target_classes[i]
        beta = source_classes[j]
        mixed = element_product(
            f.source, pullback_element(f, alpha), beta
        )
        mixed_coords = decompose_in_basis(f.source, source_classes, mixed)
        lhs = [
            sum(
                (
                    gysin.matrix[k, jj] * mixed_coords[jj]
                    for jj in range(len(source_classes))
                ),
                RationalFunction.constant(f.source.torus_rank, 0),
            )
            for k in range(len(target_classes))
        ]
        pushed_beta = _gysin_image(f, gysin, target_classes, j)
        rhs_element = element_product(f.target, alpha, pushed_beta)
        rhs = decompose_in_basis(f.target, target_classes, rhs_element)
        residual = tuple(a - b for a, b in zip(lhs, rhs))
        entries.append(
            (target_coh.names()[i], source_coh.names()[j], residual)
        )
    return ProjectionFormulaReport(map_name=f.name, entries=tuple(entries))


# -- Thom extension -----------------------------------------------------------


def _degree_slice(model: InvariantModel, degree: int) -> List[int]:
    return [i for i, g in enumerate(model.generators) if g.degree == degree]


def thom_extend(model: InvariantModel, phi_top: EquivariantElement) -> EquivariantElement:
    """Extend a closed top form to an equivariant cocycle.

    phi_top must have constant rational coefficients, be homogeneous of some
    generator degree k, and be d-closed.  The result Phi has top component
    phi_top, satisfies cartan_differential(Phi) = 0, and is built degree by
    degree: the coefficient of each monomial u^a with |a| = j solves

        d(x_j[a]) = - sum_i c_i(x_{j-1}[a - e_i])

    over Q.  If a right-hand side is not exact the extension is obstructed
    and the error names the component degree k - 2j where it happened.
    """
    if phi_top.model is not model:
        raise ValueError("phi_top does not belong to the given model")
    if phi_top.is_zero:
        return phi_top
    n = model.torus_rank
    top_vec: Dict[int, Fraction] = {}
    degrees = set()
    for idx, coeff in phi_top.terms.items():
        if isinstance(coeff, RationalFunction):
            if not coeff.is_polynomial:
                raise ValueError("phi_top coefficients must be rational constants")
            coeff = coeff.as_polynomial()
        cd = coeff.cohomological_degree()
        if cd != 0:
            raise ValueError("phi_top coefficients must be rational constants")
        top_vec[idx] = coeff.terms.get((0,) * n, Fraction(0))
        degrees.add(model.generators[idx].degree)
    if len(degrees) != 1:
        raise ValueError("phi_top must be homogeneous in generator degree")
    k = degrees.pop()

    size = len(model.generators)
    d_phi = [Fraction(0)] * size
    for idx, value in top_vec.items():
        for h in range(size):
            d_phi[h] += model.d[h][idx] * value
    if any(v != 0 for v in d_phi):
        raise ValueError("phi_top is not d-closed")

    # components[j] maps exponent tuple (|a| = j) -> generator vector over Q
    components: List[Dict[tuple, Dict[int, Fraction]]] = [
        {(0,) * n: dict(top_vec)}
    ]
    j = 1
    while True:
        prev = components[j - 1]
        rhs: Dict[tuple, Dict[int, Fraction]] = {}
        for exps, vec in prev.items():
            for i in range(n):
                bumped = tuple(e + 1 if v == i else e for v, e in enumerate(exps))
                target = rhs.setdefault(bumped, {})
                for g, value in vec.items():
                    for h in range(size):
                        entry = model.contractions[i][h][g]
                        if entry != 0:
                            target[h] = target.get(h, Fraction(0)) - entry * value
        rhs = {
            exps: {h: v for h, v in vec.items() if v != 0}
            for exps, vec in rhs.items()
        }
        rhs = {exps: vec for exps, vec in rhs.items() if vec}
        if not rhs:
            break
        component_degree = k - 2 * j
        domain = _degree_slice(model, component_degree) if component_degree >= 0 else []
        solved: Dict[tuple, Dict[int, Fraction]] = {}
        for exps, vec in sorted(rhs.items()):
            image_degree = component_degree + 1
            image_slice = _degree_slice(model, image_degree)
            rhs_vector = [vec.get(h, Fraction(0)) for h in image_slice]
            leftovers = {h for h in vec if h not in set(image_slice)}
            if leftovers:
                raise ObstructionError(
                    component_degree,
                    "contraction image leaves the expected degree slice",
                )
            matrix = [
                [model.d[h][g] for g in domain] for h in image_slice
            ]
            solution = solve_rational(matrix, rhs_vector) if domain else None
            if solution is None:
                if any(v != 0 for v in rhs_vector):
                    raise ObstructionError(
                        component_degree,
                        "contraction image is not exact "
                        f"(monomial u^{exps})",
                    )
                solution = []
            solved[exps] = {
                g: value for g, value in zip(domain, solution) if value != 0
            }
        components.append(solved)
        if not any(solved.values()):
            break
        j += 1

    terms: Dict[int, Polynomial] = {}
    for level in components:
        for exps, vec in level.items():
            for g, value in vec.items():
                mono = Polynomial.monomial(n, exps, value)
                terms[g] = terms[g] + mono if g in terms else mono
    result = EquivariantElement(model, terms)
    if not cartan_differential(model, result).is_zero:
        raise AssertionError("extension is not closed; internal solver bug")
    return result


# -- subtorus restriction ------------------------------------------------------


def _substitution_images(a: Sequence[Sequence[int]], r: int) -> List[Polynomial]:
    """u_i |-> sum_j a[i][j] v_j as rank-r polynomials."""
    images = []
    for row in a:
        images.append(
            Polynomial.linear([Fraction(int(entry)) for entry in row])
            if r
            else Polynomial.zero(0)
        )
    return images


def restrict_subtorus(
    model: InvariantModel, a: Sequence[Sequence[int]]
) -> InvariantModel:
    """Restrict the torus along an integer matrix with one row per current
    variable and one column per new variable.

    New contractions are c'_j = sum_i a[i][j] c_i; polynomial data moves by
    the substitution u_i |-> sum_j a[i][j] v_j; tangent weights transport by
    the transpose action, with killed weights folded into the trivial part.
    Zero columns (r = 0) produce the ordinary, nonequivariant complex.
    """
    n = model.torus_rank
    if len(a) != n:
        raise ValueError(f"restriction matrix needs {n} rows, got {len(a)}")
    r = len(a[0]) if n and len(a) else 0
    for row in a:
        if len(row) != r:
            raise ValueError("ragged restriction matrix")
    size = len(model.generators)
    new_contractions = []
    for j in range(r):
        block = [[Fraction(0)] * size for _ in range(size)]
        for i in range(n):
            factor = Fraction(int(a[i][j]))
            if factor == 0:
                continue
            c = model.contractions[i]
            for h in range(size):
                for g in range(size):
                    if c[h][g] != 0:
                        block[h][g] += factor * c[h][g]
        new_contractions.append(tuple(tuple(row) for row in block))

    images = _substitution_images(a, r)
    named = {
        name: {
            idx: coeff.substitute(images)
            for idx, coeff in raw.items()
            if not coeff.substitute(images).is_zero
        }
        for name, raw in model.named_cocycles.items()
    }
    named = {name: raw for name, raw in named.items() if raw}

    points = []
    for p in model.fixed_points:
        points.append(
            FixedPointDatum(
                name=p.name,
                tangent=p.tangent.restricted(a),
                evaluations=dict(p.evaluations),
                restrictions={
                    cname: poly.substitute(images)
                    for cname, poly in p.restrictions.items()
                    if cname in named
                },
            )
        )

    return replace(
        model,
        name=f"{model.name}|restricted",
        torus_rank=r,
        contractions=tuple(new_contractions),
        named_cocycles=named,
        fixed_points=tuple(points),
    )


def restrict_map(f: ModelMap, a: Sequence[Sequence[int]]) -> ModelMap:
    """The same pullback matrix between the two restricted models."""
    return ModelMap(
        name=f"{f.name}|restricted",
        source=restrict_subtorus(f.source, a),
        target=restrict_subtorus(f.target, a),
        pullback=f.pullback,
        proper=f.proper,
    )
