"""Finite invariant torus models and their equivariant cohomology.

A model is a finite graded complex with a degree +1 differential d and one
degree -1 contraction operator per torus variable, subject to d*d = 0,
d*c_i + c_i*d = 0 and c_i*c_j + c_j*c_i = 0.  The associated equivariant
complex has underlying space S(t) tensor C with the differential

    d_T(P tensor g) = P tensor d(g) + sum_i (u_i * P) tensor c_i(g),

and its cohomology is computed two ways: exactly degree by degree over Q
(Hilbert table), and generically over the fraction field, where the grading
collapses to parity because the degree-2 variables become invertible.

Whether a model faithfully truncates the invariant forms of an actual group
action is the caller's assertion; the model IS the input.  The builtin
library documents its derivations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .algebra import (
    DEFAULT_SEED,
    Polynomial,
    RationalFunction,
    monomials,
    rank_and_solve,
    rank_rational,
)
from .euler import FixedPointDatum

Coefficient = Union[Polynomial, RationalFunction]


class ModelStructureError(ValueError):
    """Dimension or schema problems detected before any axiom check."""


class MissingProductError(KeyError):
    """A needed generator product is absent from the partial table."""

    def __init__(self, left: str, right: str):
        super().__init__((left, right))
        self.left = left
        self.right = right

    def __str__(self) -> str:
        return f"product table has no entry for ({self.left}, {self.right})"


@dataclass(frozen=True)
class Generator:
    name: str
    degree: int


@dataclass(frozen=True)
class InvariantModel:
    """A finite invariant model; immutable after construction.

    Matrix convention: d[h][g] is the coefficient of generator h in d(g), and
    likewise for each contraction.  The product table is stored on canonical
    index pairs (i, j) with i <= j; the swapped product carries the graded
    sign (-1)^{|i||j|}.  Integration assigns a rational to every generator of
    degree top_degree when the model is compact.
    """

    name: str
    torus_rank: int
    generators: Tuple[Generator, ...]
    d: Tuple[Tuple[Fraction, ...], ...]
    contractions: Tuple[Tuple[Tuple[Fraction, ...], ...], ...]
    top_degree: int
    compact: bool = False
    integration: Mapping[int, Fraction] = field(default_factory=dict)
    product_table: Mapping[Tuple[int, int], Mapping[int, Fraction]] = field(
        default_factory=dict
    )
    fixed_points: Tuple[FixedPointDatum, ...] = ()
    named_cocycles: Mapping[str, Mapping[int, Polynomial]] = field(
        default_factory=dict
    )
    notes: Tuple[str, ...] = ()

    def __post_init__(self):
        g = len(self.generators)
        if len(self.d) != g or any(len(row) != g for row in self.d):
            raise ModelStructureError(
                f"model {self.name!r}: d must be {g}x{g}"
            )
        if len(self.contractions) != self.torus_rank:
            raise ModelStructureError(
                f"model {self.name!r}: expected {self.torus_rank} contraction "
                f"matrices, got {len(self.contractions)}"
            )
        for i, c in enumerate(self.contractions):
            if len(c) != g or any(len(row) != g for row in c):
                raise ModelStructureError(
                    f"model {self.name!r}: contraction {i + 1} must be {g}x{g}"
                )
        for key in self.integration:
            if not 0 <= key < g:
                raise ModelStructureError(
                    f"model {self.name!r}: integration entry for unknown generator {key}"
                )
        for (i, j) in self.product_table:
            if not (0 <= i < g and 0 <= j < g):
                raise ModelStructureError(
                    f"model {self.name!r}: product entry for unknown pair ({i}, {j})"
                )
            if i > j:
                raise ModelStructureError(
                    f"model {self.name!r}: product keys must satisfy i <= j, got ({i}, {j})"
                )

    # -- lookups ----------------------------------------------------------

    def generator_index(self, name: str) -> int:
        for i, gen in enumerate(self.generators):
            if gen.name == name:
                return i
        raise KeyError(f"model {self.name!r} has no generator {name!r}")

    def degrees(self) -> List[int]:
        return [g.degree for g in self.generators]

    def parity_indices(self) -> Tuple[List[int], List[int]]:
        even = [i for i, g in enumerate(self.generators) if g.degree % 2 == 0]
        odd = [i for i, g in enumerate(self.generators) if g.degree % 2 == 1]
        return even, odd

    def default_cutoff(self) -> int:
        return 2 * self.top_degree + 2 * self.torus_rank + 4


@dataclass
class EquivariantElement:
    """Finite sum of coefficient tensor generator terms.

    Coefficients are Polynomial for genuine Cartan-complex elements and may be
    RationalFunction for localized (fraction-field) representatives.
    """

    model: InvariantModel
    terms: Dict[int, Coefficient]

    def __post_init__(self):
        clean = {}
        for idx, coeff in self.terms.items():
            if not 0 <= idx < len(self.model.generators):
                raise ValueError(f"unknown generator index {idx}")
            if isinstance(coeff, (int, Fraction)):
                coeff = Polynomial.constant(self.model.torus_rank, coeff)
            if coeff.torus_rank != self.model.torus_rank:
                raise ValueError("coefficient rank does not match the model")
            if not coeff.is_zero:
                clean[idx] = coeff
        self.terms = clean

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, index: int) -> Coefficient:
        return self.terms.get(index, Polynomial.zero(self.model.torus_rank))

    def __add__(self, other: "EquivariantElement") -> "EquivariantElement":
        _same_model(self, other)
        terms = dict(self.terms)
        for idx, coeff in other.terms.items():
            terms[idx] = terms.get(idx, 0) + coeff if idx in terms else coeff
        return EquivariantElement(self.model, terms)

    def __neg__(self) -> "EquivariantElement":
        return EquivariantElement(self.model, {i: -c for i, c in self.terms.items()})

    def __sub__(self, other: "EquivariantElement") -> "EquivariantElement":
        return self + (-other)

    def scaled(self, factor) -> "EquivariantElement":
        return EquivariantElement(
            self.model, {i: c * factor for i, c in self.terms.items()}
        )

    def total_degree(self) -> Optional[int]:
        """Common total degree 2*polydeg + |g| of all terms, or None."""
        degs = set()
        for idx, coeff in self.terms.items():
            if isinstance(coeff, RationalFunction):
                if not coeff.is_polynomial:
                    return None
                coeff = coeff.as_polynomial()
            cd = coeff.cohomological_degree()
            if cd is None:
                return None
            degs.add(cd + self.model.generators[idx].degree)
        if len(degs) != 1:
            return None
        return degs.pop()

    def __eq__(self, other):
        if not isinstance(other, EquivariantElement):
            return NotImplemented
        if self.model is not other.model:
            return False
        keys = set(self.terms) | set(other.terms)
        n = self.model.torus_rank
        for k in keys:
            a = RationalFunction.coerce(self.coefficient(k), n)
            b = RationalFunction.coerce(other.coefficient(k), n)
            if a != b:
                return False
        return True

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for idx in sorted(self.terms):
            coeff = self.terms[idx]
            name = self.model.generators[idx].name
            text = str(coeff)
            if text == "1":
                parts.append(name)
            else:
                wrapped = text if ("+" not in text and " - " not in text) else f"({text})"
                parts.append(f"{wrapped}*{name}")
        return " + ".join(parts)


def _same_model(a: EquivariantElement, b: EquivariantElement) -> None:
    if a.model is not b.model:
        raise ValueError(
            f"element of model {a.model.name!r} combined with {b.model.name!r}"
        )


def element(model: InvariantModel, terms: Mapping) -> EquivariantElement:
    """Build an element from {generator name or index: coefficient}."""
    resolved = {}
    for key, coeff in terms.items():
        idx = key if isinstance(key, int) else model.generator_index(key)
        resolved[idx] = resolved.get(idx, 0) + coeff if idx in resolved else coeff
    return EquivariantElement(model, resolved)


def zero_element(model: InvariantModel) -> EquivariantElement:
    return EquivariantElement(model, {})


def named_cocycle_element(model: InvariantModel, name: str) -> EquivariantElement:
    if name not in model.named_cocycles:
        raise KeyError(f"model {model.name!r} has no named cocycle {name!r}")
    return EquivariantElement(model, dict(model.named_cocycles[name]))


def apply_rational_matrix(
    model: InvariantModel,
    matrix: Sequence[Sequence[Fraction]],
    x: EquivariantElement,
) -> EquivariantElement:
    """Extend a generator-space matrix S(t)-linearly to elements."""
    terms: Dict[int, Coefficient] = {}
    for g, coeff in x.terms.items():
        for h in range(len(model.generators)):
            entry = matrix[h][g]
            if entry == 0:
                continue
            add = coeff * entry
            terms[h] = terms[h] + add if h in terms else add
    return EquivariantElement(model, terms)


def cartan_differential(
    model: InvariantModel, x: EquivariantElement
) -> EquivariantElement:
    """d_T(P tensor g) = P tensor d(g) + sum_i (u_i P) tensor c_i(g)."""
    if x.model is not model:
        raise ValueError("element does not belong to the given model")
    n = model.torus_rank
    out = apply_rational_matrix(model, model.d, x)
    for i in range(n):
        u_i = Polynomial.variable(n, i)
        contracted = apply_rational_matrix(model, model.contractions[i], x)
        out = out + contracted.scaled(u_i)
    return out


def element_product(
    model: InvariantModel, x: EquivariantElement, y: EquivariantElement
) -> EquivariantElement:
    """Product through the partial table; missing needed pairs raise
    MissingProductError naming the generator pair."""
    _same_model(x, y)
    terms: Dict[int, Coefficient] = {}
    for i, ci in x.terms.items():
        for j, cj in y.terms.items():
            key = (i, j) if i <= j else (j, i)
            if key not in model.product_table:
                raise MissingProductError(
                    model.generators[i].name, model.generators[j].name
                )
            sign = 1
            if i > j:
                di = model.generators[i].degree
                dj = model.generators[j].degree
                sign = (-1) ** (di * dj)
            for k, val in model.product_table[key].items():
                add = ci * cj * (val * sign)
                terms[k] = terms[k] + add if k in terms else add
    return EquivariantElement(model, terms)


def evaluate_at_point(x: EquivariantElement, datum: FixedPointDatum) -> Coefficient:
    """Restriction of an element to a fixed point: positive-degree generators
    die, degree-0 generators take their recorded values."""
    model = x.model
    total: Coefficient = Polynomial.zero(model.torus_rank)
    for idx, coeff in x.terms.items():
        gen = model.generators[idx]
        if gen.degree > 0:
            continue
        value = datum.evaluations.get(gen.name, Fraction(0))
        total = total + coeff * value
    return total


# -- validation --------------------------------------------------------------


@dataclass(frozen=True)
class ValidationIssue:
    axiom: str
    where: str
    witness: str

    def __str__(self) -> str:
        return f"[{self.axiom}] at {self.where}: {self.witness}"


@dataclass(frozen=True)
class ValidationReport:
    model_name: str
    issues: Tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        if self.ok:
            return f"model {self.model_name!r}: all axioms hold"
        lines = [f"model {self.model_name!r}: {len(self.issues)} violation(s)"]
        lines += [f"  - {issue}" for issue in self.issues]
        return "\n".join(lines)


def _column(matrix, g: int) -> List[Fraction]:
    return [matrix[h][g] for h in range(len(matrix))]


def _compose(a, b, size: int) -> List[List[Fraction]]:
    # (a o b)[h][g] = sum_k a[h][k] b[k][g]
    return [
        [
            sum((a[h][k] * b[k][g] for k in range(size)), Fraction(0))
            for g in range(size)
        ]
        for h in range(size)
    ]


def _residual_string(model: InvariantModel, column: Sequence[Fraction]) -> str:
    parts = [
        f"{val}*{model.generators[h].name}"
        for h, val in enumerate(column)
        if val != 0
    ]
    return " + ".join(parts) if parts else "0"


def validate_model(model: InvariantModel) -> ValidationReport:
    """Check every structural axiom; an empty report means the model is a
    valid invariant g-complex with consistent auxiliary data."""
    issues: List[ValidationIssue] = []
    gens = model.generators
    size = len(gens)
    degrees = model.degrees()

    def check_degree_shift(matrix, shift: int, label: str):
        for g in range(size):
            for h in range(size):
                if matrix[h][g] != 0 and degrees[h] != degrees[g] + shift:
                    issues.append(
                        ValidationIssue(
                            axiom=f"{label} has degree {shift:+d}",
                            where=f"{gens[g].name} -> {gens[h].name}",
                            witness=f"degrees {degrees[g]} -> {degrees[h]}",
                        )
                    )

    check_degree_shift(model.d, +1, "d")
    for i, c in enumerate(model.contractions):
        check_degree_shift(c, -1, f"c_{i + 1}")

    dd = _compose(model.d, model.d, size)
    for g in range(size):
        col = _column(dd, g)
        if any(v != 0 for v in col):
            issues.append(
                ValidationIssue(
                    axiom="d o d = 0",
                    where=gens[g].name,
                    witness=_residual_string(model, col),
                )
            )

    for i, c in enumerate(model.contractions):
        anti = _compose(model.d, c, size)
        cd = _compose(c, model.d, size)
        for g in range(size):
            col = [anti[h][g] + cd[h][g] for h in range(size)]
            if any(v != 0 for v in col):
                issues.append(
                    ValidationIssue(
                        axiom="d o c + c o d = 0",
                        where=f"c_{i + 1} on {gens[g].name}",
                        witness=_residual_string(model, col),
                    )
                )

    for i in range(model.torus_rank):
        for j in range(i, model.torus_rank):
            cc = _compose(model.contractions[i], model.contractions[j], size)
            ccr = _compose(model.contractions[j], model.contractions[i], size)
            for g in range(size):
                col = [cc[h][g] + ccr[h][g] for h in range(size)]
                if any(v != 0 for v in col):
                    issues.append(
                        ValidationIssue(
                            axiom="c_i o c_j + c_j o c_i = 0",
                            where=f"(c_{i + 1}, c_{j + 1}) on {gens[g].name}",
                            witness=_residual_string(model, col),
                        )
                    )

    for g in range(size):
        if degrees[g] > model.top_degree:
            issues.append(
                ValidationIssue(
                    axiom="generator degrees bounded by top_degree",
                    where=gens[g].name,
                    witness=f"degree {degrees[g]} > {model.top_degree}",
                )
            )

    for (i, j), value in model.product_table.items():
        expected = degrees[i] + degrees[j]
        for k, coeff in value.items():
            if coeff != 0 and degrees[k] != expected:
                issues.append(
                    ValidationIssue(
                        axiom="product degree additivity",
                        where=f"{gens[i].name} * {gens[j].name}",
                        witness=f"lands on {gens[k].name} of degree {degrees[k]},"
                        f" expected {expected}",
                    )
                )
        if i == j and degrees[i] % 2 == 1:
            # odd square must vanish by graded commutativity
            if any(coeff != 0 for coeff in value.values()):
                issues.append(
                    ValidationIssue(
                        axiom="graded commutativity",
                        where=f"{gens[i].name} * {gens[i].name}",
                        witness="odd generator has nonzero square",
                    )
                )

    if model.compact:
        for g in range(size):
            if degrees[g] == model.top_degree and g not in model.integration:
                issues.append(
                    ValidationIssue(
                        axiom="integration covers top degree",
                        where=gens[g].name,
                        witness="no integration entry",
                    )
                )
    for g in model.integration:
        if degrees[g] != model.top_degree:
            issues.append(
                ValidationIssue(
                    axiom="integration only on top degree",
                    where=gens[g].name,
                    witness=f"degree {degrees[g]} != {model.top_degree}",
                )
            )

    for name, raw in model.named_cocycles.items():
        x = EquivariantElement(model, dict(raw))
        if x.total_degree() is None:
            issues.append(
                ValidationIssue(
                    axiom="named cocycles homogeneous",
                    where=name,
                    witness="mixed total degree",
                )
            )
        dx = cartan_differential(model, x)
        if not dx.is_zero:
            issues.append(
                ValidationIssue(
                    axiom="named cocycles closed",
                    where=name,
                    witness=str(dx),
                )
            )

    gen_names = {g.name for g in gens}
    degree0 = {g.name for g in gens if g.degree == 0}
    for p in model.fixed_points:
        if p.tangent.torus_rank != model.torus_rank:
            issues.append(
                ValidationIssue(
                    axiom="fixed-point tangent rank",
                    where=p.name,
                    witness=f"rank {p.tangent.torus_rank} != {model.torus_rank}",
                )
            )
        elif p.tangent.real_dimension != model.top_degree:
            issues.append(
                ValidationIssue(
                    axiom="fixed-point tangent dimension",
                    where=p.name,
                    witness=f"dim {p.tangent.real_dimension} != {model.top_degree}",
                )
            )
        for gname in p.evaluations:
            if gname not in gen_names:
                issues.append(
                    ValidationIssue(
                        axiom="fixed-point evaluations name generators",
                        where=p.name,
                        witness=f"unknown generator {gname!r}",
                    )
                )
            elif gname not in degree0:
                issues.append(
                    ValidationIssue(
                        axiom="fixed-point evaluations only in degree 0",
                        where=p.name,
                        witness=f"{gname!r} has positive degree",
                    )
                )
        for cname, restriction in p.restrictions.items():
            if cname in model.named_cocycles:
                expected = evaluate_at_point(
                    named_cocycle_element(model, cname), p
                )
                got = RationalFunction.coerce(restriction, model.torus_rank)
                if RationalFunction.coerce(expected, model.torus_rank) != got:
                    issues.append(
                        ValidationIssue(
                            axiom="restrictions match cocycle evaluations",
                            where=f"{cname} at {p.name}",
                            witness=f"declared {restriction}, evaluated {expected}",
                        )
                    )
    return ValidationReport(model_name=model.name, issues=tuple(issues))


# -- generic (fraction-field) cohomology --------------------------------------


def cartan_parity_matrices(model: InvariantModel) -> tuple:
    """(even_idx, odd_idx, A_eo, A_oe): d_T on the 2-periodic complex.

    A_eo maps the even span into the odd span (rows indexed by odd
    generators) with Polynomial entries d[h][g] + sum_i u_i c_i[h][g].
    """
    even, odd = model.parity_indices()
    n = model.torus_rank

    def entry(h: int, g: int) -> Polynomial:
        p = Polynomial.constant(n, model.d[h][g])
        for i in range(n):
            coeff = model.contractions[i][h][g]
            if coeff != 0:
                p = p + Polynomial.variable(n, i) * coeff
        return p

    a_eo = [[entry(h, g) for g in even] for h in odd]
    a_oe = [[entry(h, g) for g in odd] for h in even]
    return even, odd, a_eo, a_oe


@dataclass(frozen=True)
class GenericCohomology:
    """Ranks and representatives over the fraction field."""

    even_rank: int
    odd_rank: int
    representatives: Tuple[Tuple[str, EquivariantElement], ...]

    @property
    def total_rank(self) -> int:
        return self.even_rank + self.odd_rank

    def names(self) -> List[str]:
        return [name for name, _ in self.representatives]

    def elements(self) -> List[EquivariantElement]:
        return [el for _, el in self.representatives]


def _vector_of(element_terms: Mapping[int, Coefficient], indices: Sequence[int], n: int):
    return [
        RationalFunction.coerce(element_terms.get(i, Polynomial.zero(n)), n)
        for i in indices
    ]


def _independent_mod_image(
    image_cols: List[List[RationalFunction]],
    candidates: List[List[RationalFunction]],
    want: int,
) -> List[int]:
    """Indices of candidates that extend the image span, greedily."""
    chosen: List[int] = []
    stack = [list(col) for col in image_cols]
    base_rank = rank_and_solve(_transpose_cols(stack)).rank if stack else 0
    current = base_rank
    for idx, cand in enumerate(candidates):
        trial = stack + [list(cand)]
        r = rank_and_solve(_transpose_cols(trial)).rank
        if r > current:
            chosen.append(idx)
            stack = trial
            current = r
        if len(chosen) == want:
            break
    return chosen


def _transpose_cols(cols: List[List[RationalFunction]]) -> List[List[RationalFunction]]:
    if not cols:
        return []
    return [[col[i] for col in cols] for i in range(len(cols[0]))]


def cohomology_generic(model: InvariantModel) -> GenericCohomology:
    """Even and odd ranks of the localized 2-periodic complex, plus
    representative cocycles independent modulo the image.

    The model's named cocycles are used as representatives when they span;
    otherwise representatives are drawn from a computed kernel basis.
    """
    even, odd, a_eo, a_oe = cartan_parity_matrices(model)
    n = model.torus_rank
    res_eo = rank_and_solve(a_eo, cols=len(even), torus_rank=n)
    res_oe = rank_and_solve(a_oe, cols=len(odd), torus_rank=n)
    even_rank = len(even) - res_eo.rank - res_oe.rank
    odd_rank = len(odd) - res_oe.rank - res_eo.rank
    if even_rank < 0 or odd_rank < 0:
        raise AssertionError("negative generic rank; model invalid")

    def image_cols(matrix, source_len):
        cols = []
        for j in range(source_len):
            cols.append(
                [RationalFunction.coerce(matrix[i][j], n) for i in range(len(matrix))]
            )
        rank = rank_and_solve(matrix, cols=source_len, torus_rank=n).rank
        # prune to an independent spanning subset
        kept: List[List[RationalFunction]] = []
        for col in cols:
            if len(kept) == rank:
                break
            trial = kept + [col]
            if rank_and_solve(_transpose_cols(trial)).rank > len(kept):
                kept.append(col)
        return kept

    reps: List[Tuple[str, EquivariantElement]] = []

    named = list(model.named_cocycles.items())
    if named:
        named_even = [
            (nm, raw)
            for nm, raw in named
            if all(model.generators[i].degree % 2 == 0 for i in raw)
        ]
        named_odd = [
            (nm, raw)
            for nm, raw in named
            if all(model.generators[i].degree % 2 == 1 for i in raw)
        ]
        if len(named_even) == even_rank and len(named_odd) == odd_rank:
            im_e = image_cols(a_oe, len(odd))
            cand_e = [_vector_of(raw, even, n) for _, raw in named_even]
            im_o = image_cols(a_eo, len(even))
            cand_o = [_vector_of(raw, odd, n) for _, raw in named_odd]
            ok_e = _independent_mod_image(im_e, cand_e, even_rank)
            ok_o = _independent_mod_image(im_o, cand_o, odd_rank)
            if len(ok_e) == even_rank and len(ok_o) == odd_rank:
                for nm, raw in named_even + named_odd:
                    reps.append((nm, EquivariantElement(model, dict(raw))))
                return GenericCohomology(even_rank, odd_rank, tuple(reps))

    def computed_reps(a_out, a_in, indices, rank, prefix):
        out = []
        kernel = rank_and_solve(a_out, cols=len(indices), torus_rank=n).kernel
        im = image_cols(a_in, len(a_in[0]) if a_in and a_in[0] else 0)
        chosen = _independent_mod_image(im, [list(v) for v in kernel], rank)
        for count, idx in enumerate(chosen):
            terms = {
                gen_idx: kernel[idx][pos]
                for pos, gen_idx in enumerate(indices)
                if not kernel[idx][pos].is_zero
            }
            out.append((f"{prefix}{count}", EquivariantElement(model, terms)))
        return out

    reps.extend(computed_reps(a_eo, a_oe, even, even_rank, "even_"))
    reps.extend(computed_reps(a_oe, a_eo, odd, odd_rank, "odd_"))
    if len(reps) != even_rank + odd_rank:
        raise AssertionError("failed to assemble independent representatives")
    return GenericCohomology(even_rank, odd_rank, tuple(reps))


# -- exact degreewise cohomology ----------------------------------------------


def _slice_basis(model: InvariantModel, k: int) -> List[Tuple[tuple, int]]:
    """Q-basis of the total-degree-k slice: (monomial exponents, generator)."""
    out = []
    n = model.torus_rank
    for j in range(k // 2 + 1):
        gens_here = [
            i for i, g in enumerate(model.generators) if g.degree == k - 2 * j
        ]
        if not gens_here:
            continue
        for exps in monomials(n, j):
            for i in gens_here:
                out.append((exps, i))
    return out


def _slice_matrix(
    model: InvariantModel,
    basis_k: List[Tuple[tuple, int]],
    basis_next: List[Tuple[tuple, int]],
) -> List[List[Fraction]]:
    index_next = {key: pos for pos, key in enumerate(basis_next)}
    n = model.torus_rank
    size = len(model.generators)
    rows = [[Fraction(0)] * len(basis_k) for _ in range(len(basis_next))]
    for col, (exps, g) in enumerate(basis_k):
        for h in range(size):
            coeff = model.d[h][g]
            if coeff != 0:
                pos = index_next.get((exps, h))
                if pos is not None:
                    rows[pos][col] += coeff
        for i in range(n):
            for h in range(size):
                coeff = model.contractions[i][h][g]
                if coeff != 0:
                    bumped = tuple(
                        e + 1 if v == i else e for v, e in enumerate(exps)
                    )
                    pos = index_next.get((bumped, h))
                    if pos is not None:
                        rows[pos][col] += coeff
    return rows


def cohomology_hilbert(model: InvariantModel, cutoff: Optional[int] = None) -> List[int]:
    """dim_Q of the degree-k equivariant cohomology for 0 <= k <= cutoff."""
    if cutoff is None:
        cutoff = model.default_cutoff()
    if cutoff < 0:
        raise ValueError("cutoff must be >= 0")
    bases = [_slice_basis(model, k) for k in range(cutoff + 2)]
    ranks = []
    for k in range(cutoff + 1):
        matrix = _slice_matrix(model, bases[k], bases[k + 1])
        ranks.append(rank_rational(matrix) if matrix and matrix[0] else 0)
    table = []
    for k in range(cutoff + 1):
        dim_k = len(bases[k])
        incoming = ranks[k - 1] if k > 0 else 0
        table.append(dim_k - ranks[k] - incoming)
    if any(v < 0 for v in table):
        raise AssertionError("negative Hilbert entry; model invalid")
    return table


@dataclass(frozen=True)
class FreeComparison:
    """predicted S(t) tensor h(C) table against the actual table."""

    predicted: Tuple[int, ...]
    actual: Tuple[int, ...]

    @property
    def matches(self) -> bool:
        return self.predicted == self.actual

    @property
    def flag(self) -> Optional[str]:
        if self.matches:
            return None
        return "not even-concentrated / torsion present"


def underlying_cohomology_dims(model: InvariantModel) -> List[int]:
    """Dims of the ordinary cohomology of (C, d) per degree 0..top_degree."""
    degrees = model.degrees()
    top = max([model.top_degree] + degrees)
    by_degree = {k: [i for i, d in enumerate(degrees) if d == k] for k in range(top + 2)}
    ranks = {}
    for k in range(top + 1):
        rows = [
            [model.d[h][g] for g in by_degree[k]] for h in by_degree.get(k + 1, [])
        ]
        ranks[k] = rank_rational(rows) if rows and rows[0] else 0
    dims = []
    for k in range(top + 1):
        incoming = ranks.get(k - 1, 0)
        dims.append(len(by_degree[k]) - ranks[k] - incoming)
    return dims


def predict_free_hilbert(
    model: InvariantModel, cutoff: Optional[int] = None
) -> FreeComparison:
    """Convolve h(C) with the Hilbert function of S(t) and compare against
    the actual table; a mismatch is reported as a flag, never an error."""
    if cutoff is None:
        cutoff = model.default_cutoff()
    h_c = underlying_cohomology_dims(model)
    n = model.torus_rank
    predicted = []
    for k in range(cutoff + 1):
        total = 0
        for j in range(k // 2 + 1):
            deg = k - 2 * j
            if deg < len(h_c):
                total += len(monomials(n, j)) * h_c[deg]
        predicted.append(total)
    actual = cohomology_hilbert(model, cutoff)
    return FreeComparison(predicted=tuple(predicted), actual=tuple(actual))


def scale_contractions(model: InvariantModel, factor: Fraction) -> InvariantModel:
    """The same model with every contraction scaled; used to exercise torus
    reparametrization invariance."""
    if factor == 0:
        raise ValueError("scale factor must be nonzero")
    scaled = tuple(
        tuple(tuple(entry * factor for entry in row) for row in c)
        for c in model.contractions
    )
    return replace(
        model,
        name=f"{model.name}(c*{factor})",
        contractions=scaled,
        named_cocycles={},
        fixed_points=(),
    )
