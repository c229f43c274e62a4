"""Exact arithmetic in Q(q, h) and its framing-parameter extensions.

``Coefficient`` is a reduced fraction of :class:`~dvertex.poly.MultiPoly`.
With only q and h present (arity 2) every value is kept fully canonical:
numerator and denominator are coprime and the denominator has coprime
integer coefficients with a positive lex-smallest term.  With three or more
generators no gcd is attempted; equality falls back to cross-multiplication
or sampled evaluation.

``Factored`` is the internal product form
``scalar * prod(g^mono) * prod(P_key^mult)`` where every ``P_key`` is a
cyclotomic polynomial evaluated at a primitive Laurent monomial,
``Phi_d(q^a h^b ...)``.  Binomials 1 - q^a h^b split into these factors,
which are pairwise coprime across distinct keys; denominators therefore
carry a complete factorization and reduction never needs a polynomial gcd
on this path.  Localization sums accumulate Factored terms and convert to
Coefficient once per output monomial.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd as int_gcd

from .poly import Monomial, MultiPoly, cyclotomic_int, generator_names

BigRational = Fraction  # arbitrary-precision rational, reduced by construction

ZERO = Fraction(0)
ONE = Fraction(1)

# (d, primitive exponent vector): the factor Phi_d(g^prim), stored canonically
FactorKey = tuple[int, Monomial]


class PoleError(ZeroDivisionError):
    """A q-Pochhammer factor (or an assembled localization term) is 1/0."""


class UnsupportedExactMode(ValueError):
    """Exact equality was requested with more than the q,h generators."""


# ----------------------------------------------------------------------
# Cyclotomic factor polynomials
# ----------------------------------------------------------------------

_FACTOR_CACHE: dict[tuple[int, FactorKey], tuple[int, MultiPoly]] = {}


def factor_poly(arity: int, key: FactorKey) -> tuple[int, MultiPoly]:
    """Canonical polynomial for a factor key, with its sign.

    Returns (s, P) with P primitive (integer coefficients, positive
    lex-smallest term) and s in {1,-1} such that s*P equals the homogenized
    Phi_d(g^prim).
    """
    ck = (arity, key)
    if ck not in _FACTOR_CACHE:
        d, prim = key
        coeffs = cyclotomic_int(d)
        phi_deg = len(coeffs) - 1
        pos = tuple(max(e, 0) for e in prim)
        neg = tuple(max(-e, 0) for e in prim)
        terms: dict[Monomial, Fraction] = {}
        for j, c in enumerate(coeffs):
            if c:
                exps = tuple(j * p + (phi_deg - j) * n for p, n in zip(pos, neg))
                terms[exps] = Fraction(c)
        poly = MultiPoly(arity, terms)
        scale, prim_poly = poly.primitive_scaled()
        _FACTOR_CACHE[ck] = (1 if scale > 0 else -1, prim_poly)
    return _FACTOR_CACHE[ck]


def _binomial_factors(key: Monomial) -> tuple[int, tuple[int, ...], list[FactorKey]]:
    """Split 1 - g^key (first nonzero of key positive) into factor keys.

    Returns (sign, mono_shift, keys) with
    1 - g^key = sign * g^mono_shift * prod factor_poly(keys).
    """
    m = 0
    for e in key:
        m = int_gcd(m, abs(e))
    prim = tuple(e // m for e in key)
    neg = tuple(max(-e, 0) for e in prim)
    sign = -1
    keys = []
    for d in range(1, m + 1):
        if m % d == 0:
            fk: FactorKey = (d, prim)
            keys.append(fk)
    mono_shift = tuple(-m * e for e in neg)
    return sign, mono_shift, keys


# ----------------------------------------------------------------------
# Coefficient
# ----------------------------------------------------------------------


class Coefficient:
    """A rational function num/den in q, h and optional framing generators.

    ``_hint`` privately remembers the complete factorization of the
    denominator into cyclotomic factor keys whenever one is known; it only
    steers reduction and never carries meaning of its own.
    """

    __slots__ = ("num", "den", "_hint")

    def __init__(self, num: MultiPoly, den: MultiPoly | None = None,
                 den_factors: dict[FactorKey, int] | None = None, reduce: bool = True):
        if den is None:
            den = MultiPoly.one(num.arity)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        arity = max(num.arity, den.arity)
        num, den = num.lift(arity), den.lift(arity)
        if num.is_zero():
            self.num, self.den = MultiPoly.zero(arity), MultiPoly.one(arity)
            self._hint = {}
            return
        if reduce:
            num, den, den_factors = _reduce(num, den, den_factors)
        self.num, self.den = num, den
        self._hint = den_factors

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_rational(cls, value: Fraction | int, arity: int = 2) -> "Coefficient":
        return cls(MultiPoly.constant(arity, Fraction(value)))

    @classmethod
    def zero(cls, arity: int = 2) -> "Coefficient":
        return cls(MultiPoly.zero(arity))

    @classmethod
    def one(cls, arity: int = 2) -> "Coefficient":
        return cls(MultiPoly.one(arity))

    @property
    def arity(self) -> int:
        return self.num.arity

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num == self.den

    def lift(self, arity: int) -> "Coefficient":
        if arity == self.arity:
            return self
        out = Coefficient(self.num.lift(arity), self.den.lift(arity), reduce=False)
        if self._hint is not None:
            out._hint = {(d, k + (0,) * (arity - len(k))): m
                         for (d, k), m in self._hint.items()}
        return out

    # -- field arithmetic --------------------------------------------------

    def __add__(self, other: "Coefficient") -> "Coefficient":
        a, b = _match(self, other)
        if a.is_zero():
            return b
        if b.is_zero():
            return a
        if a._hint is not None and b._hint is not None:
            out = _add_via_lcm(a, b)
            if out is not None:
                return out
        return Coefficient(a.num * b.den + b.num * a.den, a.den * b.den,
                           den_factors=_merge_hints(a._hint, b._hint))

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        return self + (-other)

    def __neg__(self) -> "Coefficient":
        out = Coefficient(-self.num, self.den, reduce=False)
        out._hint = self._hint
        return out

    def __mul__(self, other: "Coefficient") -> "Coefficient":
        a, b = _match(self, other)
        if a.is_zero() or b.is_zero():
            return Coefficient.zero(a.arity)
        return Coefficient(a.num * b.num, a.den * b.den,
                           den_factors=_merge_hints(a._hint, b._hint))

    def __truediv__(self, other: "Coefficient") -> "Coefficient":
        a, b = _match(self, other)
        if b.is_zero():
            raise ZeroDivisionError("division by zero Coefficient")
        hint = a._hint if b.num.is_monomial() else None
        return Coefficient(a.num * b.den, a.den * b.num, den_factors=hint)

    def __pow__(self, k: int) -> "Coefficient":
        if k < 0:
            return Coefficient.one(self.arity) / self ** (-k)
        out = Coefficient.one(self.arity)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            other = Coefficient.from_rational(other, self.arity)
        if not isinstance(other, Coefficient):
            return NotImplemented
        a, b = _match(self, other)
        return (a.num * b.den - b.num * a.den).is_zero()

    __hash__ = None  # type: ignore[assignment]

    def evaluate(self, point: "EvaluationPoint") -> Fraction:
        den = self.den.evaluate(point.values)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at sample point")
        return self.num.evaluate(point.values) / den

    def to_str(self, names: tuple[str, ...] | None = None) -> str:
        names = names or generator_names(self.arity)
        num = self.num.to_str(names)
        if self.den.is_one():
            return num
        den = self.den.to_str(names)
        if len(self.num.terms) > 1:
            num = f"({num})"
        if len(self.den.terms) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Coefficient({self.to_str()})"


def _match(a: Coefficient, b: Coefficient) -> tuple[Coefficient, Coefficient]:
    if a.arity == b.arity:
        return a, b
    arity = max(a.arity, b.arity)
    return a.lift(arity), b.lift(arity)


def _add_via_lcm(a: Coefficient, b: Coefficient) -> "Coefficient | None":
    """Add over the lcm of completely factored denominators.

    Factor keys are pairwise coprime, so the keywise max really is the lcm.
    Falls back (None) when a cofactor division fails, which guards against
    hints invalidated elsewhere.
    """
    arity = a.arity
    lcm_factors: dict[FactorKey, int] = dict(a._hint or {})
    for k, m in (b._hint or {}).items():
        lcm_factors[k] = max(lcm_factors.get(k, 0), m)
    mono = tuple(
        max(min(t[g] for t in a.den.terms), min(t[g] for t in b.den.terms))
        for g in range(arity)
    )
    lcm_poly = MultiPoly.monomial(arity, mono)
    for key, mult in lcm_factors.items():
        p = factor_poly(arity, key)[1]
        for _ in range(mult):
            lcm_poly = lcm_poly * p
    cof_a = lcm_poly.divexact(a.den)
    if cof_a is None:
        return None
    cof_b = lcm_poly.divexact(b.den)
    if cof_b is None:
        return None
    return Coefficient(a.num * cof_a + b.num * cof_b, lcm_poly,
                       den_factors=lcm_factors)


def _merge_hints(a: dict[FactorKey, int] | None,
                 b: dict[FactorKey, int] | None) -> dict[FactorKey, int] | None:
    if a is None or b is None:
        return None
    out = dict(a)
    for k, m in b.items():
        out[k] = out.get(k, 0) + m
    return out


def _cancel_monomial(num: MultiPoly, den: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    lo_n = [min(m[g] for m in num.terms) for g in range(num.arity)]
    lo_d = [min(m[g] for m in den.terms) for g in range(den.arity)]
    common = tuple(min(x, y) for x, y in zip(lo_n, lo_d))
    if any(common):
        mono = MultiPoly.monomial(num.arity, common)
        num = num.divexact(mono)
        den = den.divexact(mono)
    return num, den


def _reduce(num: MultiPoly, den: MultiPoly, den_factors: dict[FactorKey, int] | None
            ) -> tuple[MultiPoly, MultiPoly, dict[FactorKey, int] | None]:
    """Cancel common factors and normalize the denominator.

    With a complete factor hint the cancellation is exact trial division per
    cyclotomic factor and nothing else can be shared.  Without one, a
    Schwartz-Zippel coprimality pretest guards the primitive-Euclidean gcd
    in (Q[h])[q].
    """
    from .poly import gcd_qh

    num, den = _cancel_monomial(num, den)
    if den_factors is not None:
        hint: dict[FactorKey, int] = {}
        for key, mult in den_factors.items():
            p = factor_poly(num.arity, key)[1]
            left = mult
            while left and not num.is_constant():
                q = num.divexact(p)
                if q is None:
                    break
                d = den.divexact(p)
                if d is None:
                    break
                num, den = q, d
                left -= 1
            if left:
                hint[key] = left
        scale, den = den.primitive_scaled()
        num = num.scale(1 / scale)
        return num, den, hint
    if not den.is_monomial():
        bivariate = max(num.max_generator_used(), den.max_generator_used()) <= 2
        if bivariate:
            g = gcd_qh(num, den)
            if not g.is_one():
                nq, dq = num.divexact(g), den.divexact(g)
                if nq is not None and dq is not None:
                    num, den = nq, dq
    scale, den = den.primitive_scaled()
    num = num.scale(1 / scale)
    return num, den, {} if den.is_monomial() else None


# ----------------------------------------------------------------------
# Factored products
# ----------------------------------------------------------------------


@dataclass
class Factored:
    """scalar * prod(g^mono) * prod(P_key^mult) with cyclotomic factor keys.

    ``zero_mult`` counts literal (1-1) factors: positive means the value is
    an exact zero, negative an uncancelled pole.
    """

    arity: int
    scalar: Fraction
    mono: tuple[int, ...]
    factors: dict[FactorKey, int]
    zero_mult: int = 0

    @classmethod
    def one(cls, arity: int) -> "Factored":
        return cls(arity, ONE, (0,) * arity, {})

    @classmethod
    def from_monomial(cls, arity: int, mono: Monomial,
                      scalar: Fraction | int = 1) -> "Factored":
        return cls(arity, Fraction(scalar), tuple(mono), {})

    def is_zero(self) -> bool:
        return self.scalar == 0 or self.zero_mult > 0

    def copy(self) -> "Factored":
        return Factored(self.arity, self.scalar, self.mono, dict(self.factors),
                        self.zero_mult)

    def mul_scalar(self, c: Fraction | int) -> "Factored":
        out = self.copy()
        out.scalar *= Fraction(c)
        return out

    def mul_monomial(self, mono: Monomial, power: int = 1) -> "Factored":
        out = self.copy()
        out.mono = tuple(a + power * b for a, b in zip(out.mono, mono))
        return out

    def mul_binomial(self, key: Monomial, mult: int = 1) -> "Factored":
        """Multiply by (1 - g^key)^mult."""
        out = self.copy()
        out._imul_binomial(key, mult)
        return out

    def _imul_binomial(self, key: Monomial, mult: int) -> None:
        if all(e == 0 for e in key):
            self.zero_mult += mult
            return
        first = next(e for e in key if e)
        if first < 0:
            # (1 - g^k) = (-g^k) * (1 - g^(-k))
            if mult % 2:
                self.scalar = -self.scalar
            self.mono = tuple(a + mult * b for a, b in zip(self.mono, key))
            key = tuple(-e for e in key)
        sign, mono_shift, keys = _binomial_factors(key)
        if mult % 2 and sign < 0:
            self.scalar = -self.scalar
        if any(mono_shift):
            self.mono = tuple(a + mult * b for a, b in zip(self.mono, mono_shift))
        for fk in keys:
            fsign = factor_poly(self.arity, fk)[0]
            if mult % 2 and fsign < 0:
                self.scalar = -self.scalar
            m = self.factors.get(fk, 0) + mult
            if m:
                self.factors[fk] = m
            else:
                self.factors.pop(fk, None)

    def __mul__(self, other: "Factored") -> "Factored":
        if self.arity != other.arity:
            raise ValueError("arity mismatch in Factored product")
        out = self.copy()
        out.scalar *= other.scalar
        out.mono = tuple(a + b for a, b in zip(out.mono, other.mono))
        out.zero_mult += other.zero_mult
        for key, mult in other.factors.items():
            m = out.factors.get(key, 0) + mult
            if m:
                out.factors[key] = m
            else:
                out.factors.pop(key, None)
        return out

    def inverse(self) -> "Factored":
        if self.scalar == 0:
            raise ZeroDivisionError("inverting zero Factored")
        return Factored(self.arity, 1 / self.scalar,
                        tuple(-e for e in self.mono),
                        {k: -m for k, m in self.factors.items()},
                        -self.zero_mult)

    def __truediv__(self, other: "Factored") -> "Factored":
        return self * other.inverse()

    def evaluate(self, point: "EvaluationPoint") -> Fraction:
        if self.zero_mult > 0:
            return ZERO
        if self.zero_mult < 0:
            raise PoleError("net (1-1) pole in Factored value")
        val = self.scalar
        for g, e in enumerate(self.mono):
            if e:
                val *= point.values[g] ** e
        for key, mult in self.factors.items():
            f = factor_poly(self.arity, key)[1].evaluate(point.values)
            if f == 0:
                raise ZeroDivisionError("factor vanishes at sample point")
            val *= f ** mult
        return val

    def to_coefficient(self) -> Coefficient:
        if self.zero_mult < 0:
            raise PoleError("Factored value has an uncancelled pole")
        if self.zero_mult > 0 or self.scalar == 0:
            return Coefficient.zero(self.arity)
        arity = self.arity
        num = MultiPoly.constant(arity, self.scalar)
        den = MultiPoly.one(arity)
        den_hint: dict[FactorKey, int] = {}
        for key, mult in self.factors.items():
            p = factor_poly(arity, key)[1]
            if mult > 0:
                for _ in range(mult):
                    num = num * p
            else:
                den_hint[key] = -mult
                for _ in range(-mult):
                    den = den * p
        pos = tuple(max(e, 0) for e in self.mono)
        neg = tuple(max(-e, 0) for e in self.mono)
        num = num * MultiPoly.monomial(arity, pos)
        den = den * MultiPoly.monomial(arity, neg)
        return Coefficient(num, den, den_factors=den_hint)


def sum_factored(terms: list[Factored], arity: int) -> Coefficient:
    """Exact sum of factored values over their common factored denominator."""
    live = []
    for t in terms:
        if t.zero_mult < 0:
            raise PoleError("localization term with uncancelled pole")
        if not t.is_zero():
            live.append(t)
    if not live:
        return Coefficient.zero(arity)
    if len(live) == 1:
        return live[0].to_coefficient()

    den_mult: dict[FactorKey, int] = {}
    den_mono = [0] * arity
    for t in live:
        for key, mult in t.factors.items():
            if mult < 0:
                den_mult[key] = max(den_mult.get(key, 0), -mult)
        for g in range(arity):
            den_mono[g] = max(den_mono[g], -t.mono[g])

    total = MultiPoly.zero(arity)
    for t in live:
        num = MultiPoly.constant(arity, t.scalar)
        for key, mult in t.factors.items():
            comp = mult + den_mult.get(key, 0)
            if comp < 0:
                raise AssertionError("common denominator misses a factor")
            p = factor_poly(arity, key)[1]
            for _ in range(comp):
                num = num * p
        for key, mult in den_mult.items():
            if key not in t.factors:
                p = factor_poly(arity, key)[1]
                for _ in range(mult):
                    num = num * p
        shift = tuple(a + b for a, b in zip(t.mono, den_mono))
        if any(e < 0 for e in shift):
            raise AssertionError("common denominator monomial too small")
        num = num * MultiPoly.monomial(arity, shift)
        total = total + num

    den = MultiPoly.monomial(arity, tuple(den_mono))
    for key, mult in den_mult.items():
        p = factor_poly(arity, key)[1]
        for _ in range(mult):
            den = den * p
    return Coefficient(total, den, den_factors=den_mult)


# ----------------------------------------------------------------------
# Sampled evaluation
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class EvaluationPoint:
    """Nonzero rational values for every generator, derived from a seed."""

    values: tuple[Fraction, ...]
    seed: int


SAMPLE_LO, SAMPLE_HI = 2, 2**31


def sample_points(arity: int, n_points: int, seed: int = 0) -> list[EvaluationPoint]:
    """Deterministic pseudo-random evaluation points for sampled equality."""
    rng = random.Random(seed)
    points = []
    for _ in range(n_points):
        values = tuple(
            Fraction(rng.randint(SAMPLE_LO, SAMPLE_HI), rng.randint(SAMPLE_LO, SAMPLE_HI))
            for _ in range(arity)
        )
        points.append(EvaluationPoint(values, seed))
    return points


DEFAULT_SAMPLE_POINTS = 3


@dataclass(frozen=True)
class EqMode:
    """Comparison mode: exact cross-multiplication or sampled evaluation."""

    kind: str = "exact"  # "exact" | "sampled"
    points: int = DEFAULT_SAMPLE_POINTS
    seed: int = 0

    @classmethod
    def exact(cls) -> "EqMode":
        return cls("exact")

    @classmethod
    def sampled(cls, points: int = DEFAULT_SAMPLE_POINTS, seed: int = 0) -> "EqMode":
        if points < 1:
            raise ValueError("sampled mode needs at least one point")
        return cls("sampled", points, seed)


def coeff_eq(a: Coefficient, b: Coefficient, mode: EqMode = EqMode.exact()) -> bool:
    a, b = _match(a, b)
    if mode.kind == "exact":
        if a.arity > 2 and (a.num.max_generator_used() > 2 or a.den.max_generator_used() > 2
                            or b.num.max_generator_used() > 2 or b.den.max_generator_used() > 2):
            raise UnsupportedExactMode(
                "exact comparison supports only the q,h generators")
        return a == b
    lhs, rhs = a.num * b.den, b.num * a.den
    for point in sample_points(a.arity, mode.points, mode.seed):
        if lhs.evaluate(point.values) != rhs.evaluate(point.values):
            return False
    return True


def coeff_arith(a: Coefficient, b: Coefficient, op: str) -> Coefficient:
    """Named dispatch used by the CLI and the acceptance suite."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")
