"""Sparse exact multivariate polynomials over the rationals.

A polynomial is a dict mapping exponent tuples to Fraction coefficients.
Generator 0 is always q and generator 1 is h (the paper's hbar); any further
generators are framing parameters a<i>_<j>.  Zero coefficients are never
stored, so the empty dict is the zero polynomial.

The bivariate gcd used to keep q,h rational functions canonical is a
primitive-PRS Euclidean algorithm in (Z[h])[q].
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as int_gcd

Monomial = tuple[int, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class MultiPoly:
    """Immutable-by-convention sparse polynomial with Fraction coefficients."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: dict[Monomial, Fraction] | None = None):
        self.arity = arity
        self.terms = {m: c for m, c in (terms or {}).items() if c != 0}

    # -- constructors -------------------------------------------------

    @classmethod
    def zero(cls, arity: int) -> "MultiPoly":
        return cls(arity, {})

    @classmethod
    def constant(cls, arity: int, value: Fraction | int) -> "MultiPoly":
        value = Fraction(value)
        if value == 0:
            return cls(arity, {})
        return cls(arity, {(0,) * arity: value})

    @classmethod
    def one(cls, arity: int) -> "MultiPoly":
        return cls.constant(arity, 1)

    @classmethod
    def monomial(cls, arity: int, exps: Monomial, coeff: Fraction | int = 1) -> "MultiPoly":
        coeff = Fraction(coeff)
        if coeff == 0:
            return cls(arity, {})
        if len(exps) != arity:
            raise ValueError(f"exponent tuple {exps} does not match arity {arity}")
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in monomial {exps}")
        return cls(arity, {tuple(exps): coeff})

    # -- basic queries -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == {(0,) * self.arity: ONE}

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.arity in self.terms)

    def constant_value(self) -> Fraction:
        return self.terms.get((0,) * self.arity, ZERO)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(m) for m in self.terms)

    def leading(self) -> tuple[Monomial, Fraction]:
        """Lex-leading term (q before h before framing generators)."""
        m = max(self.terms)
        return m, self.terms[m]

    def lift(self, arity: int) -> "MultiPoly":
        """Zero-pad exponent tuples up to a larger arity."""
        if arity == self.arity:
            return self
        if arity < self.arity:
            if any(any(m[arity:]) for m in self.terms):
                raise ValueError("cannot drop generators with nonzero exponents")
            return MultiPoly(arity, {m[:arity]: c for m, c in self.terms.items()})
        pad = (0,) * (arity - self.arity)
        return MultiPoly(arity, {m + pad: c for m, c in self.terms.items()})

    def max_generator_used(self) -> int:
        """Smallest arity that can still represent this polynomial (at least 2)."""
        used = 2
        for m in self.terms:
            for k in range(self.arity - 1, used - 1, -1):
                if m[k]:
                    used = max(used, k + 1)
                    break
        return used

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        a, b = _match(self, other)
        out = dict(a.terms)
        for m, c in b.terms.items():
            s = out.get(m, ZERO) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return MultiPoly(a.arity, out)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self + (-other)

    def __neg__(self) -> "MultiPoly":
        return MultiPoly(self.arity, {m: -c for m, c in self.terms.items()})

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        a, b = _match(self, other)
        if not a.terms or not b.terms:
            return MultiPoly(a.arity, {})
        if len(a.terms) > len(b.terms):
            a, b = b, a
        out: dict[Monomial, Fraction] = {}
        for ma, ca in a.terms.items():
            for mb, cb in b.terms.items():
                m = tuple(x + y for x, y in zip(ma, mb))
                s = out.get(m, ZERO) + ca * cb
                if s:
                    out[m] = s
                else:
                    out.pop(m, None)
        return MultiPoly(a.arity, out)

    def scale(self, c: Fraction | int) -> "MultiPoly":
        c = Fraction(c)
        if c == 0:
            return MultiPoly(self.arity, {})
        return MultiPoly(self.arity, {m: c * v for m, v in self.terms.items()})

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiPoly):
            return NotImplemented
        a, b = _match(self, other)
        return a.terms == b.terms

    __hash__ = None  # type: ignore[assignment]

    def evaluate(self, values: tuple[Fraction, ...]) -> Fraction:
        if len(values) < self.arity:
            raise ValueError("not enough generator values")
        powers: list[dict[int, Fraction]] = [{0: ONE} for _ in range(self.arity)]

        def pw(g: int, e: int) -> Fraction:
            cache = powers[g]
            if e not in cache:
                cache[e] = values[g] ** e
            return cache[e]

        total = ZERO
        for m, c in self.terms.items():
            v = c
            for g, e in enumerate(m):
                if e:
                    v *= pw(g, e)
            total += v
        return total

    # -- exact division ------------------------------------------------

    def divexact(self, other: "MultiPoly") -> "MultiPoly | None":
        """Exact quotient self/other, or None when the division is not exact."""
        a, b = _match(self, other)
        if b.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        if a.is_zero():
            return MultiPoly(a.arity, {})
        if b.is_monomial():
            (mb, cb), out = next(iter(b.terms.items())), {}
            for m, c in a.terms.items():
                q = tuple(x - y for x, y in zip(m, mb))
                if any(e < 0 for e in q):
                    return None
                out[q] = c / cb
            return MultiPoly(a.arity, out)
        import heapq

        rem = dict(a.terms)
        mb, cb = max(b.terms), b.terms[max(b.terms)]
        tail = [(mo, co) for mo, co in b.terms.items() if mo != mb]
        heap = [tuple(-e for e in m) for m in rem]
        heapq.heapify(heap)
        quot: dict[Monomial, Fraction] = {}
        while heap:
            m = tuple(-e for e in heapq.heappop(heap))
            c = rem.pop(m, ZERO)
            if not c:
                continue
            q = tuple(x - y for x, y in zip(m, mb))
            if any(e < 0 for e in q):
                return None
            f = c / cb
            quot[q] = quot.get(q, ZERO) + f
            for mo, co in tail:
                t = tuple(x + y for x, y in zip(q, mo))
                old = rem.get(t, ZERO)
                s = old - f * co
                if s:
                    if not old:
                        heapq.heappush(heap, tuple(-e for e in t))
                    rem[t] = s
                else:
                    rem.pop(t, None)
        return MultiPoly(a.arity, quot)

    # -- normalization helpers ------------------------------------------

    def primitive_scaled(self) -> tuple[Fraction, "MultiPoly"]:
        """Write self = scale * prim with prim having coprime integer
        coefficients and a positive lex-smallest term (so denominators render
        as 1-q rather than -1+q)."""
        if not self.terms:
            return ONE, self
        den_lcm = 1
        for c in self.terms.values():
            den_lcm = den_lcm * c.denominator // int_gcd(den_lcm, c.denominator)
        num_gcd = 0
        for c in self.terms.values():
            num_gcd = int_gcd(num_gcd, c.numerator * (den_lcm // c.denominator))
        scale = Fraction(num_gcd, den_lcm)
        if self.terms[min(self.terms)] < 0:
            scale = -scale
        return scale, self.scale(1 / scale)

    def to_str(self, names: tuple[str, ...] | None = None) -> str:
        """Render with terms in ascending lex order, e.g. ``1-h+q*h``."""
        if not self.terms:
            return "0"
        names = names or generator_names(self.arity)
        parts: list[str] = []
        for m in sorted(self.terms):
            c = self.terms[m]
            factors = [f"{names[g]}^{e}" if e > 1 else names[g] for g, e in enumerate(m) if e]
            mono = "*".join(factors)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+" if c > 0 else "-") + body)
        return "".join(parts)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"MultiPoly({self.to_str()})"


def generator_names(arity: int, slots: tuple[tuple[int, int], ...] = ()) -> tuple[str, ...]:
    """Default generator names: q, h, then a<i>_<j> for framing slots."""
    names = ["q", "h"]
    for k in range(arity - 2):
        if k < len(slots):
            i, j = slots[k]
            names.append(f"a{i}_{j}")
        else:
            names.append(f"a{k + 1}")
    return tuple(names)


def _match(a: MultiPoly, b: MultiPoly) -> tuple[MultiPoly, MultiPoly]:
    if a.arity == b.arity:
        return a, b
    arity = max(a.arity, b.arity)
    return a.lift(arity), b.lift(arity)


# ----------------------------------------------------------------------
# Bivariate gcd in (Z[h])[q] via a primitive polynomial remainder sequence.
#
# Univariate polynomials in h are represented as int lists (index = degree);
# bivariate ones as dicts q-degree -> int list.
# ----------------------------------------------------------------------


def _h_trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _h_mul(a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return _h_trim(out)


def _h_sub(a: list[int], b: list[int]) -> list[int]:
    out = list(a) + [0] * (len(b) - len(a))
    for i, y in enumerate(b):
        out[i] -= y
    return _h_trim(out)


def _h_scale(a: list[int], c: int) -> list[int]:
    return [] if c == 0 else [x * c for x in a]

def _h_shift(a: list[int], k: int) -> list[int]:
    return [0] * k + a if a else []


def _h_content(a: list[int]) -> int:
    g = 0
    for x in a:
        g = int_gcd(g, x)
    return g


def _h_primitive(a: list[int]) -> list[int]:
    g = _h_content(a)
    if g == 0:
        return []
    if a[-1] < 0:
        g = -g
    return [x // g for x in a]


def _h_gcd(a: list[int], b: list[int]) -> list[int]:
    """gcd in Z[h] via the primitive Euclidean algorithm."""
    a, b = _h_primitive(list(a)), _h_primitive(list(b))
    if not a:
        return b
    if not b:
        return a
    ca, cb = _h_content(a) or 1, _h_content(b) or 1
    while b:
        # pseudo-remainder of a by b
        r = list(a)
        while r and len(r) >= len(b):
            lead = r[-1]
            lb = b[-1]
            r = _h_sub(_h_scale(r, lb), _h_shift(_h_scale(b, lead), len(r) - len(b)))
        a, b = b, _h_primitive(r)
    return _h_primitive(_h_scale(a, int_gcd(ca, cb)))


QHPoly = dict[int, list[int]]  # q-degree -> coefficient in Z[h]


def _to_zz(p: MultiPoly) -> QHPoly:
    den_lcm = 1
    for c in p.terms.values():
        den_lcm = den_lcm * c.denominator // int_gcd(den_lcm, c.denominator)
    out: QHPoly = {}
    for m, c in p.terms.items():
        if any(m[2:]):
            raise ValueError("gcd is only defined for q,h polynomials")
        qe, he = m[0], m[1] if len(m) > 1 else 0
        row = out.setdefault(qe, [])
        while len(row) <= he:
            row.append(0)
        row[he] += c.numerator * (den_lcm // c.denominator)
    return {qe: _h_trim(row) for qe, row in out.items() if _h_trim(list(row))}


def _from_zz(p: QHPoly, arity: int) -> MultiPoly:
    terms: dict[Monomial, Fraction] = {}
    pad = (0,) * (arity - 2)
    for qe, row in p.items():
        for he, c in enumerate(row):
            if c:
                terms[(qe, he) + pad] = Fraction(c)
    return MultiPoly(arity, terms)


def _q_content(p: QHPoly) -> list[int]:
    g: list[int] = []
    for row in p.values():
        g = _h_gcd(g, row)
        if g == [1]:
            break
    return g


def _q_divexact_h(p: QHPoly, d: list[int]) -> QHPoly:
    """Divide every q-coefficient by d in Z[h] (assumed exact)."""
    out: QHPoly = {}
    for qe, row in p.items():
        q, r = _h_divmod(row, d)
        if r:
            raise ArithmeticError("inexact content division")
        out[qe] = q
    return out


def _h_divmod(a: list[int], b: list[int]) -> tuple[list[int], list[int]]:
    """Division in Q[h] restricted to exact integer quotients of interest."""
    a = list(a)
    q: list[int] = [0] * max(0, len(a) - len(b) + 1)
    while a and len(a) >= len(b):
        if a[-1] % b[-1]:
            return q, a
        f = a[-1] // b[-1]
        k = len(a) - len(b)
        q[k] = f
        a = _h_sub(a, _h_shift(_h_scale(b, f), k))
    return q, a


def _q_prem(a: QHPoly, b: QHPoly) -> QHPoly:
    """Pseudo-remainder in (Z[h])[q]."""
    da, db = max(a), max(b)
    lb = b[db]
    r = {qe: list(row) for qe, row in a.items()}
    while r:
        dr = max(r)
        if dr < db:
            break
        lr = r[dr]
        shift = dr - db
        new: QHPoly = {}
        for qe, row in r.items():
            new[qe] = _h_mul(row, lb)
        for qe, row in b.items():
            t = new.get(qe + shift, [])
            new[qe + shift] = _h_sub(t, _h_mul(row, lr))
        r = {qe: row for qe, row in new.items() if row}
    return r


def _q_primitive(p: QHPoly) -> QHPoly:
    if not p:
        return {}
    cont = _q_content(p)
    return _q_divexact_h(p, cont)


_CYCLO_CACHE: dict[int, list[int]] = {1: [-1, 1]}


def cyclotomic_int(d: int) -> list[int]:
    """Integer coefficients of the d-th cyclotomic polynomial."""
    if d not in _CYCLO_CACHE:
        num = [-1] + [0] * (d - 1) + [1]  # x^d - 1
        for e in range(1, d):
            if d % e == 0:
                q, r = _h_divmod(num, cyclotomic_int(e))
                if r:
                    raise ArithmeticError("cyclotomic division failed")
                num = q
        _CYCLO_CACHE[d] = num
    return _CYCLO_CACHE[d]


def _int_gcd_poly(a: list[int], b: list[int]) -> list[int]:
    """gcd of univariate integer polynomials (primitive PRS)."""
    a, b = _h_primitive(list(a)), _h_primitive(list(b))
    while b:
        r = list(a)
        while r and len(r) >= len(b):
            r = _h_sub(_h_scale(r, b[-1]), _h_shift(_h_scale(b, r[-1]), len(r) - len(b)))
        a, b = b, _h_primitive(r)
    return a

_PRETEST_POINTS = (7919, 104729)


def _probably_coprime_q(pa: QHPoly, pb: QHPoly) -> bool:
    """Schwartz-Zippel pretest: evaluate h at fixed primes, gcd the images.

    A constant image gcd at either point certifies (up to a negligible
    failure set) that the q-primitive parts share no factor of positive
    q-degree; the full PRS runs whenever the test is inconclusive.
    """
    for r in _PRETEST_POINTS:
        ia = [0] * (max(pa) + 1)
        for qe, row in pa.items():
            ia[qe] = sum(c * r**k for k, c in enumerate(row))
        ib = [0] * (max(pb) + 1)
        for qe, row in pb.items():
            ib[qe] = sum(c * r**k for k, c in enumerate(row))
        g = _int_gcd_poly(_h_trim(ia), _h_trim(ib))
        if len(g) <= 1:
            return True
    return False


def gcd_qh(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    """gcd of two polynomials in q,h only (primitive, positive trailing term)."""
    arity = max(a.arity, b.arity)
    if a.is_zero():
        return b.primitive_scaled()[1]
    if b.is_zero():
        return a.primitive_scaled()[1]
    if a.is_monomial() or b.is_monomial():
        am = [min(m[g] for m in a.terms) for g in range(a.arity)]
        bm = [min(m[g] for m in b.terms) for g in range(b.arity)]
        exps = tuple(min(x, y) for x, y in zip(am + [0] * (arity - a.arity),
                                               bm + [0] * (arity - b.arity)))
        return MultiPoly.monomial(arity, exps)
    pa, pb = _to_zz(a), _to_zz(b)
    ca, cb = _q_content(pa), _q_content(pb)
    pa, pb = _q_divexact_h(pa, ca), _q_divexact_h(pb, cb)
    cont = _h_gcd(ca, cb)
    q_common = min(min(pa), min(pb))
    pa = {qe - min(pa): row for qe, row in pa.items()}
    pb = {qe - min(pb): row for qe, row in pb.items()}
    if _probably_coprime_q(pa, pb):
        g = _from_zz({q_common: cont}, arity)
        return g.primitive_scaled()[1]
    if max(pa) < max(pb):
        pa, pb = pb, pa
    while pb:
        r = _q_prem(pa, pb)
        pa, pb = pb, _q_primitive(r)
    g = _from_zz({qe + q_common: _h_mul(row, cont) for qe, row in pa.items()}, arity)
    return g.primitive_scaled()[1]
