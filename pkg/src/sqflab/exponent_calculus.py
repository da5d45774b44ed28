"""Exact-rational exponent bookkeeping and the distribution-exponent optimizer.

Sizes are tracked as X^cx * q^cr with rational cx, cr.  Writing q = X^rho
turns every bound of the analysis into a linear form in rho, every region
condition into a linear inequality over the normalized box exponents
(m, n) = (log_X M, log_X N), and the final optimization into exact rational
arithmetic: no floats, no tolerances.

Epsilon-sized factors (q^eps and friends) carry exponent zero here; they
live in the strict-inequality slack that the optimizer reports.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

RationalLike = Fraction | int | str


class InfeasibleError(ValueError):
    """The constraint region admits no point (or no vertex to optimize at)."""


class UnboundedError(ValueError):
    """The objective grows without bound over the region."""


class AlphaInfeasibleError(ValueError):
    """No interpolation weight in (0, 1) achieves the requested shape."""


def _frac(value: RationalLike) -> Fraction:
    return value if isinstance(value, Fraction) else Fraction(value)


@dataclass(frozen=True)
class ExponentForm:
    """Growth exponent of a term, as a linear form coeff_x + coeff_rho * rho.

    Represents a size X^coeff_x * q^coeff_rho; with q = X^rho the overall
    X-exponent is value_at(rho).  Adding forms multiplies the sizes they
    stand for.
    """

    coeff_x: Fraction
    coeff_rho: Fraction
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff_x", _frac(self.coeff_x))
        object.__setattr__(self, "coeff_rho", _frac(self.coeff_rho))

    def value_at(self, rho: Fraction) -> Fraction:
        return self.coeff_x + self.coeff_rho * _frac(rho)

    def plus(self, other: "ExponentForm", label: str | None = None) -> "ExponentForm":
        return ExponentForm(
            self.coeff_x + other.coeff_x,
            self.coeff_rho + other.coeff_rho,
            label if label is not None else self.label,
        )

    def scaled(self, k: RationalLike) -> "ExponentForm":
        k = _frac(k)
        return ExponentForm(self.coeff_x * k, self.coeff_rho * k, self.label)

    def describe(self) -> str:
        return f"X^({self.coeff_x}) * q^({self.coeff_rho})"


ZERO_FORM = ExponentForm(Fraction(0), Fraction(0), "one")


@dataclass(frozen=True)
class AlphaResult:
    """Interpolation weight and the resulting uniform exponent of M*N^2."""

    alpha: Fraction
    exponent: Fraction


def best_alpha(
    pair1: tuple[RationalLike, RationalLike],
    pair2: tuple[RationalLike, RationalLike],
) -> AlphaResult:
    """Weight alpha making the endpoint blend a pure power of M*N^2.

    Endpoints are (M-exponent, N-exponent) pairs; the blended bound has
    M-exponent E(a) = a*e1 + (1-a)*e2 and N-exponent F(a) likewise, and we
    solve F(a) = 2*E(a) so the bound collapses to (M*N^2)^E(a).  Identical
    endpoints make the blend constant; by convention alpha = 1/2 is
    returned with the shared M-exponent.
    """
    e1, f1 = map(_frac, pair1)
    e2, f2 = map(_frac, pair2)
    if (e1, f1) == (e2, f2):
        return AlphaResult(alpha=Fraction(1, 2), exponent=e1)
    denom = (f1 - f2) - 2 * (e1 - e2)
    num = 2 * e2 - f2
    if denom == 0:
        if num == 0:
            # Every alpha works; blend at the midpoint.
            alpha = Fraction(1, 2)
        else:
            raise AlphaInfeasibleError(
                f"no interpolation of {pair1} and {pair2} is a power of M*N^2"
            )
    else:
        alpha = num / denom
        if not 0 < alpha < 1:
            raise AlphaInfeasibleError(
                f"required weight {alpha} falls outside (0, 1)"
            )
    exponent = alpha * e1 + (1 - alpha) * e2
    # The defining equation must hold on re-substitution.
    assert alpha * f1 + (1 - alpha) * f2 == 2 * exponent
    return AlphaResult(alpha=alpha, exponent=exponent)


@dataclass(frozen=True)
class LinearConstraint:
    """coeff_m * m + coeff_n * n <= bound(x, rho)."""

    coeff_m: Fraction
    coeff_n: Fraction
    bound: ExponentForm
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeff_m", _frac(self.coeff_m))
        object.__setattr__(self, "coeff_n", _frac(self.coeff_n))


def lower_bound_m(form: ExponentForm, label: str = "") -> LinearConstraint:
    """m >= form, written as -m <= -form."""
    return LinearConstraint(Fraction(-1), Fraction(0), form.scaled(-1), label or "m-floor")


def lower_bound_n(form: ExponentForm, label: str = "") -> LinearConstraint:
    return LinearConstraint(Fraction(0), Fraction(-1), form.scaled(-1), label or "n-floor")


def _vertex_forms(
    ci: LinearConstraint, cj: LinearConstraint
) -> tuple[ExponentForm, ExponentForm] | None:
    """Intersection of two facet lines as forms in (x, rho); None if parallel."""
    det = ci.coeff_m * cj.coeff_n - ci.coeff_n * cj.coeff_m
    if det == 0:
        return None
    m_form = ci.bound.scaled(cj.coeff_n / det).plus(
        cj.bound.scaled(-ci.coeff_n / det), label="m*"
    )
    n_form = cj.bound.scaled(ci.coeff_m / det).plus(
        ci.bound.scaled(-cj.coeff_m / det), label="n*"
    )
    return m_form, n_form


def _recession_directions(
    constraints: Sequence[LinearConstraint],
) -> list[tuple[Fraction, Fraction]]:
    """Candidate extreme rays of {d : A d <= 0}; covers pointed cones and half-planes."""
    dirs = []
    for c in constraints:
        dirs.append((-c.coeff_n, c.coeff_m))
        dirs.append((c.coeff_n, -c.coeff_m))
        dirs.append((-c.coeff_m, -c.coeff_n))
    return dirs


def sup_box_exponent(
    coeff_m: RationalLike,
    coeff_n: RationalLike,
    constraints: Sequence[LinearConstraint],
    rho: RationalLike,
    offset: ExponentForm = ZERO_FORM,
    label: str = "box-supremum",
) -> ExponentForm:
    """Maximize coeff_m * m + coeff_n * n over a polygon, in exact rationals.

    Constraint right sides are exponent forms evaluated at the given rho
    (with x normalized to 1); vertices are enumerated by intersecting facet
    pairs, so the returned maximum is itself a form in (x, rho) rather than
    a bare number.  Raises on empty regions and on objectives that escape
    along a recession direction.
    """
    coeff_m = _frac(coeff_m)
    coeff_n = _frac(coeff_n)
    rho = _frac(rho)
    if not constraints:
        raise UnboundedError("no constraints given")

    bound_values = [c.bound.value_at(rho) for c in constraints]

    def feasible(m_val: Fraction, n_val: Fraction) -> bool:
        return all(
            c.coeff_m * m_val + c.coeff_n * n_val <= bv
            for c, bv in zip(constraints, bound_values)
        )

    best_value: Fraction | None = None
    best_form: ExponentForm | None = None
    for i in range(len(constraints)):
        for j in range(i + 1, len(constraints)):
            forms = _vertex_forms(constraints[i], constraints[j])
            if forms is None:
                continue
            m_form, n_form = forms
            m_val = m_form.value_at(rho)
            n_val = n_form.value_at(rho)
            if not feasible(m_val, n_val):
                continue
            value = coeff_m * m_val + coeff_n * n_val
            if best_value is None or value > best_value:
                best_value = value
                best_form = m_form.scaled(coeff_m).plus(
                    n_form.scaled(coeff_n),
                    label=f"{label}[{constraints[i].label or i}&{constraints[j].label or j}]",
                )
    if best_form is None:
        raise InfeasibleError("constraint region is empty or has no vertex")

    for d_m, d_n in _recession_directions(constraints):
        if (d_m, d_n) == (0, 0):
            continue
        if all(c.coeff_m * d_m + c.coeff_n * d_n <= 0 for c in constraints):
            if coeff_m * d_m + coeff_n * d_n > 0:
                raise UnboundedError(
                    f"objective unbounded along direction ({d_m}, {d_n})"
                )
    return best_form.plus(offset, label=best_form.label)


@dataclass(frozen=True)
class ThetaResult:
    """Largest admissible rho, with the constraint that stops it.

    For every rho strictly below theta, each term exponent sits strictly
    below the target's; slack_at_theta records the per-term gap at theta
    itself (zero for the binding term).
    """

    theta: Fraction | None
    binding_constraint: str | None
    slack_at_theta: dict[str, Fraction]
    feasible: bool


def compute_theta(
    terms: Sequence[ExponentForm],
    target: ExponentForm = ExponentForm(Fraction(1), Fraction(-1), "equidistribution-target"),
    rho_min: RationalLike = Fraction(1, 2),
    rho_max: RationalLike = Fraction(1),
) -> ThetaResult:
    """sup of the rho for which every term stays at or below the target.

    All data are linear in rho, so the feasible set is an interval cut out
    by exact rational endpoints; theta is its upper end (capped at rho_max,
    where the domain itself closes).
    """
    if not terms:
        raise ValueError("need at least one term")
    rho_min = _frac(rho_min)
    rho_max = _frac(rho_max)
    upper = rho_max
    binding: str | None = None
    lower = rho_min
    for term in terms:
        slope = term.coeff_rho - target.coeff_rho
        room = target.coeff_x - term.coeff_x
        if slope > 0:
            bound = room / slope
            if bound < upper:
                upper = bound
                binding = term.label
        elif slope < 0:
            lower = max(lower, room / slope)
        elif room < 0:
            return ThetaResult(
                theta=None, binding_constraint=term.label, slack_at_theta={}, feasible=False
            )
    if lower > upper or lower >= rho_max:
        return ThetaResult(theta=None, binding_constraint=binding, slack_at_theta={}, feasible=False)
    slack = {
        term.label: target.value_at(upper) - term.value_at(upper) for term in terms
    }
    return ThetaResult(
        theta=upper,
        binding_constraint=binding if binding is not None else "rho-domain-cap",
        slack_at_theta=slack,
        feasible=True,
    )


def corollary_exponent(theta: RationalLike) -> Fraction:
    """Growth exponent of the least squarefree member, 1/theta."""
    theta = _frac(theta)
    if not 0 < theta < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    return 1 / theta


# ---------------------------------------------------------------------------
# Anchor choices and their feasibility at the exponent level.

def anchor_exponents(rho: RationalLike) -> tuple[Fraction, Fraction, bool]:
    """(m0, n0) anchor exponents at a given rho, plus the m0 floor flag.

    m0 = max(1 - 3 rho/2, 0): the max picks up the constant floor once
    rho > 2/3.  n0 = 1/2 - 3 rho/8.
    """
    rho = _frac(rho)
    raw_m0 = 1 - Fraction(3, 2) * rho
    floored = raw_m0 < 0
    m0 = max(raw_m0, Fraction(0))
    n0 = Fraction(1, 2) - Fraction(3, 8) * rho
    return m0, n0, floored


def region_constraints(
    m0: Fraction, n0: Fraction, x_cap: ExponentForm | None = None
) -> list[LinearConstraint]:
    """The exponent-level box region: m >= m0, n >= n0, m + 2n <= 1."""
    cap = x_cap if x_cap is not None else ExponentForm(Fraction(1), Fraction(0), "volume")
    return [
        lower_bound_m(ExponentForm(m0, Fraction(0), "m-anchor")),
        lower_bound_n(ExponentForm(n0, Fraction(0), "n-anchor")),
        LinearConstraint(Fraction(1), Fraction(2), cap, "volume-cap"),
    ]


@dataclass(frozen=True)
class ChoiceCheck:
    label: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ChoiceReport:
    """Exponent-level feasibility of the anchor choices at one rho."""

    rho: Fraction
    m0_exponent: Fraction
    n0_exponent: Fraction
    m0_floored: bool
    checks: tuple[ChoiceCheck, ...] = field(default_factory=tuple)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)


def verify_choices(rho: RationalLike) -> ChoiceReport:
    """Check the anchor choices against every side condition they must meet.

    Everything is exact: threshold comparisons, range inclusion, and the
    two box-supremum comparisons against the amplification range 3 rho/4.
    The constant factor 2 in the anchors provides the strict versions of
    the threshold inequalities; at exponent level they appear as >=.
    """
    rho = _frac(rho)
    if not Fraction(1, 2) <= rho < 1:
        raise ValueError(f"rho must lie in [1/2, 1), got {rho}")
    m0, n0, floored = anchor_exponents(rho)
    amp = Fraction(3, 4) * rho
    checks = []

    threshold_m = 1 - Fraction(3, 2) * rho
    checks.append(
        ChoiceCheck(
            "m-anchor-exceeds-threshold",
            m0 >= threshold_m,
            f"m0={m0} vs X*q^(-3/2) exponent {threshold_m} (factor 2 gives strictness)",
        )
    )
    threshold_n = Fraction(1, 2) - Fraction(3, 8) * rho
    checks.append(
        ChoiceCheck(
            "n-anchor-exceeds-threshold",
            n0 >= threshold_n,
            f"n0={n0} vs X^(1/2)*q^(-3/8) exponent {threshold_n} (factor 2 gives strictness)",
        )
    )
    checks.append(
        ChoiceCheck("m-anchor-range", 0 <= m0 <= 1, f"need 0 <= {m0} <= 1")
    )
    checks.append(
        ChoiceCheck(
            "n-anchor-range", 0 <= n0 <= Fraction(1, 2), f"need 0 <= {n0} <= 1/2"
        )
    )
    constraints = region_constraints(m0, n0)
    for coeffs, name in (((1, 0), "box-m-within-amplification"),
                         ((0, 1), "box-n-within-amplification")):
        try:
            sup_form = sup_box_exponent(coeffs[0], coeffs[1], constraints, rho)
            sup_val = sup_form.value_at(rho)
            checks.append(
                ChoiceCheck(name, sup_val <= amp, f"sup={sup_val} vs 3*rho/4={amp}")
            )
        except InfeasibleError:
            checks.append(ChoiceCheck(name, False, "region empty"))
    return ChoiceReport(
        rho=rho,
        m0_exponent=m0,
        n0_exponent=n0,
        m0_floored=floored,
        checks=tuple(checks),
    )


# ---------------------------------------------------------------------------
# Term menus.

DEFAULT_MENU: tuple[ExponentForm, ...] = (
    ExponentForm(Fraction(11, 36), Fraction(0), "box-supremum"),
    ExponentForm(Fraction(1), Fraction(-3, 2), "m-anchor"),
    ExponentForm(Fraction(1, 2), Fraction(-3, 8), "n-anchor"),
)

# Single-orientation variant: only the (M, N)-ordered amplification bound is
# available, so the box supremum comes from the vertex (3*rho/4, 1/2-3*rho/8)
# of the same region, and the cross term over the n-anchor is kept.  This is
# an exploratory reproduction attempt; it tops out at 28/45, short of the
# 9/13 known from a different argument.
ONE_SIDED_MENU: tuple[ExponentForm, ...] = (
    ExponentForm(Fraction(1, 8), Fraction(13, 32), "box-supremum-one-sided"),
    ExponentForm(Fraction(0), Fraction(0), "m-anchor-floor"),
    ExponentForm(Fraction(1, 2), Fraction(-3, 8), "n-anchor"),
    ExponentForm(Fraction(1, 2), Fraction(-5, 8), "cross-term"),
)

MENUS: dict[str, tuple[ExponentForm, ...]] = {
    "default": DEFAULT_MENU,
    "one-sided": ONE_SIDED_MENU,
}


def parse_term_menu(text: str) -> list[ExponentForm]:
    """Parse a declarative term menu: one `label coeff_x coeff_rho` per line.

    Blank lines and '#' comments are skipped; coefficients are rationals
    like 11/36 or -3/2.
    """
    terms = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(
                f"line {lineno}: expected `label coeff_x coeff_rho`, got {raw!r}"
            )
        label, cx, cr = parts
        terms.append(ExponentForm(Fraction(cx), Fraction(cr), label))
    if not terms:
        raise ValueError("menu contains no terms")
    return terms
