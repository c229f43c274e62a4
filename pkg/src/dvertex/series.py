"""Truncated multivariate power series in the Kahler variables.

``TruncatedSeries`` stores exact :class:`~dvertex.coeffs.Coefficient`
coefficients keyed by z-exponent tuples, truncated by total degree.  The
q-Pochhammer symbol and the q-binomial series F live here; both are defined
on Laurent monomial arguments q^a h^b prod(a_ij^c) z^m.

Internally series under construction keep lists of Factored addends per
monomial and are collapsed once at the end (``FactoredSeries``), which keeps
all q-Pochhammer cancellation exact and cheap.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .coeffs import (Coefficient, EqMode, Factored, PoleError, coeff_eq,
                     sum_factored)
from .poly import Monomial, MultiPoly, generator_names

ONE = Fraction(1)


class ArityError(ValueError):
    """Series operands live in different Kahler variable spaces."""


class DomainError(ValueError):
    """Invalid argument for a series-level operation."""


# ----------------------------------------------------------------------
# q-Pochhammer
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class PochArg:
    """The Laurent monomial q^qexp h^hexp prod(a^aexps) fed to (x)_d."""

    qexp: int
    hexp: int
    aexps: tuple[int, ...] = ()

    def monomial(self, arity: int) -> Monomial:
        pad = (0,) * (arity - 2 - len(self.aexps))
        return (self.qexp, self.hexp) + self.aexps + pad

    @property
    def arity(self) -> int:
        return 2 + len(self.aexps)


def qpoch_factored(mono: Monomial, d: int, arity: int) -> Factored:
    """(x)_d for a monomial x, in factored form.

    Vanishing factors are recorded on ``zero_mult`` rather than raised, so
    ratios assembled later can cancel zeros against poles exactly.
    """
    out = Factored.one(arity)
    if d >= 0:
        for i in range(d):
            key = (mono[0] + i,) + tuple(mono[1:])
            out._imul_binomial(key, 1)
    else:
        for i in range(1, -d + 1):
            key = (mono[0] - i,) + tuple(mono[1:])
            out._imul_binomial(key, -1)
    return out


def qpoch(x: PochArg, d: int) -> Coefficient:
    """The three-case q-Pochhammer symbol (x)_d as an exact Coefficient.

    For d < 0 a factor 1 - x q^-i that vanishes identically is a pole; the
    error names the offending i.
    """
    arity = x.arity
    mono = x.monomial(arity)
    if d < 0:
        for i in range(1, -d + 1):
            if mono[0] - i == 0 and not any(mono[1:]):
                raise PoleError(f"(x)_{d} has vanishing factor 1 - x*q^-{i} at i={i}")
    return qpoch_factored(mono, d, arity).to_coefficient()


def fbinom_coeff(d: int, arity: int = 2) -> Factored:
    """(h)_d / (q)_d, the d-th coefficient of the q-binomial series."""
    h_mono = (0, 1) + (0,) * (arity - 2)
    q_mono = (1, 0) + (0,) * (arity - 2)
    return qpoch_factored(h_mono, d, arity) / qpoch_factored(q_mono, d, arity)


# ----------------------------------------------------------------------
# TruncatedSeries
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Term:
    """A single coefficient * z-monomial pair."""

    coeff: Coefficient
    monomial: Monomial


class TruncatedSeries:
    """Exact power series in z_1..z_n truncated at total degree ``cap``.

    ``var_caps`` optionally truncates per variable as well.
    """

    __slots__ = ("nvars", "cap", "terms", "var_caps")

    def __init__(self, nvars: int, cap: int,
                 terms: dict[Monomial, Coefficient] | None = None,
                 var_caps: tuple[int, ...] | None = None):
        self.nvars = nvars
        self.cap = cap
        self.var_caps = var_caps
        self.terms: dict[Monomial, Coefficient] = {}
        for m, c in (terms or {}).items():
            if self._fits(m) and not c.is_zero():
                self.terms[m] = c

    def _fits(self, m: Monomial) -> bool:
        if sum(m) > self.cap:
            return False
        if self.var_caps is not None and any(e > c for e, c in zip(m, self.var_caps)):
            return False
        return True

    @classmethod
    def one(cls, nvars: int, cap: int) -> "TruncatedSeries":
        return cls(nvars, cap, {(0,) * nvars: Coefficient.one()})

    @classmethod
    def zero(cls, nvars: int, cap: int) -> "TruncatedSeries":
        return cls(nvars, cap, {})

    def coefficient(self, m: Monomial) -> Coefficient:
        return self.terms.get(tuple(m), Coefficient.zero())

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        if self.nvars != other.nvars:
            raise ArityError("adding series with different variable counts")
        cap = min(self.cap, other.cap)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            out[m] = c if s is None else s + c
        return TruncatedSeries(self.nvars, cap, out, self.var_caps)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        if self.nvars != other.nvars:
            raise ArityError("multiplying series with different variable counts")
        cap = min(self.cap, other.cap)
        out: dict[Monomial, Coefficient] = {}
        for ma, ca in self.terms.items():
            da = sum(ma)
            for mb, cb in other.terms.items():
                if da + sum(mb) > cap:
                    continue
                m = tuple(x + y for x, y in zip(ma, mb))
                prod = ca * cb
                s = out.get(m)
                out[m] = prod if s is None else s + prod
        return TruncatedSeries(self.nvars, cap, out, self.var_caps)

    def scale(self, c: Coefficient) -> "TruncatedSeries":
        return TruncatedSeries(self.nvars, self.cap,
                               {m: v * c for m, v in self.terms.items()},
                               self.var_caps)

    def constant_term(self) -> Coefficient:
        return self.coefficient((0,) * self.nvars)

    def to_json(self, slots: tuple[tuple[int, int], ...] = ()) -> dict:
        arity = max([2] + [c.arity for c in self.terms.values()])
        names = generator_names(arity, slots)
        return {
            "n": self.nvars,
            "cap": self.cap,
            "terms": [
                {"exps": list(m), "coeff": self.terms[m].to_str(names)}
                for m in sorted(self.terms)
            ],
        }

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        inner = ", ".join(f"z^{m}: {c.to_str()}" for m, c in sorted(self.terms.items()))
        return f"TruncatedSeries({inner})"


@dataclass
class SeriesEqReport:
    equal: bool
    witness: Monomial | None = None
    lhs_coeff: str | None = None
    rhs_coeff: str | None = None


def series_eq(a: TruncatedSeries, b: TruncatedSeries,
              mode: EqMode = EqMode.exact()) -> SeriesEqReport:
    """Coefficient-wise comparison; reports the lex-least disagreement."""
    if a.nvars != b.nvars:
        raise ArityError("comparing series with different variable counts")
    if a.cap != b.cap:
        raise ArityError("comparing series with different degree caps")
    for m in sorted(set(a.terms) | set(b.terms)):
        ca, cb = a.coefficient(m), b.coefficient(m)
        if not coeff_eq(ca, cb, mode):
            return SeriesEqReport(False, m, ca.to_str(), cb.to_str())
    return SeriesEqReport(True)


def series_arith(a: TruncatedSeries, b: TruncatedSeries, op: str) -> TruncatedSeries:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


# ----------------------------------------------------------------------
# Factored series builder
# ----------------------------------------------------------------------


@dataclass
class FactoredSeries:
    """Series under construction: per-monomial lists of Factored addends."""

    nvars: int
    cap: int
    arity: int
    terms: dict[Monomial, list[Factored]] = field(default_factory=dict)
    var_caps: tuple[int, ...] | None = None

    @classmethod
    def one(cls, nvars: int, cap: int, arity: int = 2,
            var_caps: tuple[int, ...] | None = None) -> "FactoredSeries":
        fs = cls(nvars, cap, arity, var_caps=var_caps)
        fs.terms[(0,) * nvars] = [Factored.one(arity)]
        return fs

    def _fits(self, m: Monomial) -> bool:
        if sum(m) > self.cap:
            return False
        if self.var_caps is not None and any(e > c for e, c in zip(m, self.var_caps)):
            return False
        return True

    def add_term(self, mono: Monomial, value: Factored) -> None:
        if value.is_zero() and value.zero_mult >= 0:
            return
        if self._fits(mono):
            self.terms.setdefault(tuple(mono), []).append(value)

    def mul_sparse(self, factor_terms: list[tuple[Monomial, Factored]]) -> "FactoredSeries":
        out = FactoredSeries(self.nvars, self.cap, self.arity, var_caps=self.var_caps)
        for ma, vals in self.terms.items():
            for mb, fb in factor_terms:
                m = tuple(x + y for x, y in zip(ma, mb))
                if not out._fits(m):
                    continue
                bucket = out.terms.setdefault(m, [])
                bucket.extend(v * fb for v in vals)
        return out

    def finalize(self) -> TruncatedSeries:
        collapsed = {m: sum_factored(vals, self.arity)
                     for m, vals in self.terms.items()}
        return TruncatedSeries(self.nvars, self.cap, collapsed, self.var_caps)


def fbinom_factored_terms(coeff: Factored, mono: Monomial, cap: int,
                          var_caps: tuple[int, ...] | None = None
                          ) -> list[tuple[Monomial, Factored]]:
    """The truncated expansion of F(coeff * z^mono) as sparse factored terms."""
    deg = sum(mono)
    if deg < 1:
        raise DomainError("F requires an argument of positive z-degree")
    arity = coeff.arity
    out: list[tuple[Monomial, Factored]] = []
    power = Factored.one(arity)
    d = 0
    while d * deg <= cap:
        m = tuple(e * d for e in mono)
        if var_caps is not None and any(e > c for e, c in zip(m, var_caps)):
            break
        out.append((m, fbinom_coeff(d, arity) * power))
        power = power * coeff
        d += 1
    return out


def fbinom_series(t: Term, cap: int,
                  var_caps: tuple[int, ...] | None = None) -> TruncatedSeries:
    """F evaluated on a coefficient * z-monomial argument, truncated at cap.

    F(z) = sum_d (h)_d/(q)_d z^d; the argument must carry positive z-degree.
    """
    deg = sum(t.monomial)
    if deg < 1:
        raise DomainError("F requires an argument of positive z-degree")
    nvars = len(t.monomial)
    arity = t.coeff.arity
    terms: dict[Monomial, Coefficient] = {}
    power = Coefficient.one(arity)
    d = 0
    while d * deg <= cap:
        m = tuple(e * d for e in t.monomial)
        terms[m] = fbinom_coeff(d, arity).to_coefficient() * power
        power = power * t.coeff
        d += 1
    return TruncatedSeries(nvars, cap, terms, var_caps)


def fbinom_product(factors: list[tuple[Factored, Monomial]], nvars: int, cap: int,
                   arity: int = 2,
                   var_caps: tuple[int, ...] | None = None) -> TruncatedSeries:
    """prod F(coeff_k z^{m_k}) truncated at cap, built in factored form."""
    acc = FactoredSeries.one(nvars, cap, arity, var_caps=var_caps)
    for coeff, mono in factors:
        acc = acc.mul_sparse(fbinom_factored_terms(coeff, mono, cap, var_caps))
    return acc.finalize()


# ----------------------------------------------------------------------
# Independent F oracle: log/exp expansion of the product form
# ----------------------------------------------------------------------


def fbinom_product_form(cap: int) -> TruncatedSeries:
    """F(z) to degree cap from prod_k (1 - z h q^k)/(1 - z q^k).

    Expands log F(z) = sum_m z^m (1 - h^m) / (m (1 - q^m)) and exponentiates;
    this never touches the defining sum, so it is an independent oracle.
    """
    log_coeffs: dict[int, Coefficient] = {}
    for m in range(1, cap + 1):
        num = Factored.one(2).mul_binomial((0, m))
        den = Factored.one(2).mul_binomial((m, 0))
        log_coeffs[m] = (num / den).to_coefficient() * Coefficient.from_rational(Fraction(1, m))
    # exp via f' = g' f with f = exp(g), degree by degree
    coeffs = [Coefficient.one()]
    for d in range(1, cap + 1):
        acc = Coefficient.zero()
        for m in range(1, d + 1):
            if m in log_coeffs:
                acc = acc + log_coeffs[m] * coeffs[d - m] * Coefficient.from_rational(m)
        coeffs.append(acc * Coefficient.from_rational(Fraction(1, d)))
    return TruncatedSeries(1, cap, {(d,): c for d, c in enumerate(coeffs)})
