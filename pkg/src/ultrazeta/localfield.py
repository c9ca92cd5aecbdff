"""Finite-precision arithmetic in Q_p and F_p((T)).

Elements are truncated uniformizer expansions ``pi^v * (d_0 + d_1 pi + ...)``
with ``d_0 != 0``; the digit count is the precision.  All valuations, norms
and additive-character values are exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import Inexact

DEFAULT_PRECISION = 32

#: valuation assigned to the zero element
INFINITE = math.inf


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """A non-Archimedean local field: Q_p or F_p((T)), residue field F_p."""

    kind: str
    p: int

    def __post_init__(self):
        if self.kind not in ("Qp", "LaurentFp"):
            raise ValueError(f"unknown field kind {self.kind!r}")
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")

    @property
    def q(self) -> int:
        # residue cardinality; restricted to q = p
        return self.p

    def to_json(self) -> dict:
        return {"kind": self.kind, "p": self.p}

    @staticmethod
    def from_json(obj: dict) -> "FieldSpec":
        return FieldSpec(kind=obj["kind"], p=int(obj["p"]))


def Qp(p: int) -> FieldSpec:
    return FieldSpec("Qp", p)


def LaurentFp(p: int) -> FieldSpec:
    return FieldSpec("LaurentFp", p)


@dataclass(frozen=True)
class LocalFieldElement:
    """Truncated element: digits d_0.. with d_0 != 0, or the exact zero.

    Zero carries valuation +inf and an empty digit tuple.
    """

    field: FieldSpec
    valuation: object  # int, or INFINITE for zero
    digits: tuple

    def __post_init__(self):
        if self.valuation is INFINITE:
            if self.digits:
                raise ValueError("zero element must have no digits")
            return
        if not self.digits:
            raise ValueError("nonzero element needs at least one digit")
        if self.digits[0] % self.field.p == 0:
            raise ValueError("leading digit must be a unit")
        if any(not (0 <= d < self.field.p) for d in self.digits):
            raise ValueError("digits out of range")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(field: FieldSpec) -> "LocalFieldElement":
        return LocalFieldElement(field, INFINITE, ())

    @staticmethod
    def from_digits(field: FieldSpec, valuation: int, digits,
                    ) -> "LocalFieldElement":
        """Build from a digit list, stripping leading zeros.

        An all-zero digit list is taken to mean the exact zero.
        """
        digits = [d % field.p for d in digits]
        shift = 0
        while shift < len(digits) and digits[shift] == 0:
            shift += 1
        if shift == len(digits):
            return LocalFieldElement.zero(field)
        return LocalFieldElement(field, valuation + shift,
                                 tuple(digits[shift:]))

    @staticmethod
    def from_int(field: FieldSpec, n: int,
                 precision: int = DEFAULT_PRECISION) -> "LocalFieldElement":
        return LocalFieldElement.from_rational(field, Fraction(n), precision)

    @staticmethod
    def from_rational(field: FieldSpec, r, precision: int = DEFAULT_PRECISION,
                      ) -> "LocalFieldElement":
        """Exact rational -> truncated expansion.

        For F_p((T)) only rationals with p-power denominator embed (as
        constants times powers of T they do not; we map the integer value
        reduced mod p, so plain integers give residue constants).
        """
        r = Fraction(r)
        if r == 0:
            return LocalFieldElement.zero(field)
        p = field.p
        if field.kind == "Qp":
            num, den = r.numerator, r.denominator
            vn = 0
            while num % p == 0:
                num //= p
                vn += 1
            vd = 0
            while den % p == 0:
                den //= p
                vd += 1
            val = vn - vd
            unit = num * pow(den, -1, p ** precision) % p ** precision
            return _qp_from_unit(field, val, unit, precision)
        # LaurentFp: constants only
        if r.denominator != 1:
            raise ValueError("only integers embed as F_p((T)) constants")
        c = r.numerator % p
        if c == 0:
            return LocalFieldElement.zero(field)
        return LocalFieldElement(field, 0,
                                 (c,) + (0,) * (precision - 1))

    @staticmethod
    def from_laurent_coeffs(field: FieldSpec, coeffs: dict,
                            precision: int = DEFAULT_PRECISION,
                            ) -> "LocalFieldElement":
        """F_p((T)) element from {exponent: coefficient}."""
        if field.kind != "LaurentFp":
            raise ValueError("from_laurent_coeffs needs a LaurentFp field")
        nz = {e: c % field.p for e, c in coeffs.items() if c % field.p}
        if not nz:
            return LocalFieldElement.zero(field)
        val = min(nz)
        digits = [nz.get(val + i, 0) for i in range(precision)]
        return LocalFieldElement(field, val, tuple(digits))

    # -- inspection --------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.valuation is INFINITE

    @property
    def precision(self) -> int:
        return len(self.digits)

    @property
    def known_to(self):
        """First uniformizer exponent at which the digit is unknown."""
        if self.is_zero:
            return INFINITE
        return self.valuation + self.precision

    def digit_at(self, exp: int) -> int:
        """Digit of pi^exp; raises Inexact beyond the known range."""
        if self.is_zero:
            return 0
        if exp < self.valuation:
            return 0
        if exp >= self.known_to:
            raise Inexact(f"digit at exponent {exp} beyond precision")
        return self.digits[exp - self.valuation]

    def norm(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.field.q) ** (-self.valuation)

    def as_fraction(self) -> Fraction:
        """Exact rational value of the truncated representative (Qp only)."""
        if self.field.kind != "Qp":
            raise ValueError("as_fraction is only defined over Qp")
        if self.is_zero:
            return Fraction(0)
        p = self.field.p
        unit = sum(d * p ** i for i, d in enumerate(self.digits))
        return Fraction(unit) * Fraction(p) ** self.valuation

    # -- arithmetic --------------------------------------------------------

    def _unit_int(self) -> int:
        p = self.field.p
        return sum(d * p ** i for i, d in enumerate(self.digits))

    def _check_same_field(self, other):
        if self.field != other.field:
            raise ValueError("operands live in different fields")

    def __neg__(self):
        if self.is_zero:
            return self
        p = self.field.p
        if self.field.kind == "Qp":
            u = (-self._unit_int()) % p ** self.precision
            return _qp_from_unit(self.field, self.valuation, u,
                                 self.precision)
        return LocalFieldElement(self.field, self.valuation,
                                 tuple((-d) % p for d in self.digits))

    def __add__(self, other):
        self._check_same_field(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        p = self.field.p
        v = min(self.valuation, other.valuation)
        known = min(self.known_to, other.known_to)
        width = known - v
        if width <= 0:
            raise Inexact("no overlapping known digits")
        if self.field.kind == "Qp":
            s = (self._unit_int() * p ** (self.valuation - v)
                 + other._unit_int() * p ** (other.valuation - v))
            s %= p ** width
            if s == 0:
                raise Inexact("sum indistinguishable from zero "
                              "at current precision")
            return _qp_from_unit_shifted(self.field, v, s, width)
        digits = [0] * width
        for i, d in enumerate(self.digits):
            j = self.valuation - v + i
            if j < width:
                digits[j] = (digits[j] + d) % p
        for i, d in enumerate(other.digits):
            j = other.valuation - v + i
            if j < width:
                digits[j] = (digits[j] + d) % p
        if not any(digits):
            raise Inexact("sum indistinguishable from zero "
                          "at current precision")
        return LocalFieldElement.from_digits(self.field, v, digits)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        self._check_same_field(other)
        if self.is_zero or other.is_zero:
            return LocalFieldElement.zero(self.field)
        p = self.field.p
        prec = min(self.precision, other.precision)
        val = self.valuation + other.valuation
        if self.field.kind == "Qp":
            u = self._unit_int() * other._unit_int() % p ** prec
            return _qp_from_unit(self.field, val, u, prec)
        digits = [0] * prec
        for i, a in enumerate(self.digits[:prec]):
            if a == 0:
                continue
            for j, b in enumerate(other.digits[:prec - i]):
                digits[i + j] = (digits[i + j] + a * b) % p
        return LocalFieldElement(self.field, val, tuple(digits))

    def __truediv__(self, other):
        self._check_same_field(other)
        if other.is_zero:
            raise ZeroDivisionError("division by zero field element")
        if self.is_zero:
            return self
        p = self.field.p
        prec = min(self.precision, other.precision)
        val = self.valuation - other.valuation
        if self.field.kind == "Qp":
            inv = pow(other._unit_int() % p ** prec, -1, p ** prec)
            u = self._unit_int() * inv % p ** prec
            return _qp_from_unit(self.field, val, u, prec)
        a, b = self.digits, other.digits
        inv0 = pow(b[0], -1, p)
        out = []
        for k in range(prec):
            acc = a[k] if k < len(a) else 0
            for j in range(k):
                acc -= out[j] * (b[k - j] if k - j < len(b) else 0)
            out.append(acc * inv0 % p)
        return LocalFieldElement(self.field, val, tuple(out))

    # -- serialization -----------------------------------------------------

    def to_json(self) -> dict:
        val = "inf" if self.is_zero else self.valuation
        return {"field": self.field.to_json(), "val": val,
                "digits": list(self.digits)}

    @staticmethod
    def from_json(obj: dict) -> "LocalFieldElement":
        fld = FieldSpec.from_json(obj["field"])
        if obj["val"] == "inf" or obj["val"] is None:
            return LocalFieldElement.zero(fld)
        return LocalFieldElement.from_digits(fld, int(obj["val"]),
                                             obj["digits"])

    def __repr__(self):
        if self.is_zero:
            return f"0 ({self.field.kind}, p={self.field.p})"
        pi = "T" if self.field.kind == "LaurentFp" else str(self.field.p)
        head = ",".join(str(d) for d in self.digits[:6])
        tail = ".." if self.precision > 6 else ""
        return f"({head}{tail})*{pi}^{self.valuation}"


def _qp_from_unit(field, val, unit, prec):
    p = field.p
    digits = []
    u = unit
    for _ in range(prec):
        digits.append(u % p)
        u //= p
    return LocalFieldElement(field, val, tuple(digits))


def _qp_from_unit_shifted(field, val, s, width):
    """Integer s known mod p^width at base valuation val; normalize."""
    p = field.p
    shift = 0
    while s % p == 0:
        s //= p
        shift += 1
    return _qp_from_unit(field, val + shift, s, width - shift)


# -- module operations ------------------------------------------------------

def valuation_and_norm(x: LocalFieldElement):
    """(ord(x), |x|_K) with the zero convention (inf, 0)."""
    if x.is_zero:
        return INFINITE, Fraction(0)
    return x.valuation, x.norm()


def field_arith(a: LocalFieldElement, b: LocalFieldElement, op: str,
                ) -> LocalFieldElement:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def char_fraction(x: LocalFieldElement) -> Fraction:
    """r in [0,1) with chi(x) = exp(2 pi i r) for the standard character.

    Over Q_p this is the p-adic fractional part; over F_p((T)) it is
    (coefficient of T^-1)/p.  Requires every negative-exponent digit of x
    to be resolved.
    """
    if x.is_zero:
        return Fraction(0)
    if x.field.kind == "Qp":
        if x.valuation >= 0:
            return Fraction(0)
        if x.known_to < 0:
            raise Inexact("negative-exponent digits not fully resolved")
        p = x.field.p
        r = sum(Fraction(x.digit_at(j), p ** (-j))
                for j in range(x.valuation, 0))
        return r % 1
    if x.valuation > -1:
        return Fraction(0)
    if x.known_to <= -1:
        raise Inexact("coefficient of T^-1 not resolved")
    return Fraction(x.digit_at(-1), x.field.p)


def char_fraction_of_rational(p: int, r) -> Fraction:
    """p-adic fractional part of an exact rational, reduced mod 1.

    Only the p-part of the denominator contributes; the prime-to-p part is
    inverted modulo the relevant p-power.
    """
    r = Fraction(r)
    den = r.denominator
    k = 0
    while den % p == 0:
        den //= p
        k += 1
    if k == 0:
        return Fraction(0)
    pk = p ** k
    num = r.numerator * pow(den, -1, pk)
    return Fraction(num % pk, pk)


def ball_measure(field: FieldSpec, radius_exp: int, n: int,
                 center=None) -> Fraction:
    """Haar measure of an n-dimensional ball of radius q^radius_exp.

    Normalized so the unit polydisc has measure 1; the center is
    irrelevant by translation invariance.
    """
    return Fraction(field.q) ** (radius_exp * n)


def sphere_measure(field: FieldSpec, radius_exp: int, n: int) -> Fraction:
    """Measure of the sphere ||x|| = q^radius_exp in K^n."""
    q = Fraction(field.q)
    return q ** (radius_exp * n) * (1 - q ** (-n))


@dataclass(frozen=True)
class FieldVector:
    """Point of K^n with the max-norm."""

    coords: tuple

    def __post_init__(self):
        if not self.coords:
            raise ValueError("empty vector")
        fld = self.coords[0].field
        if any(c.field != fld for c in self.coords):
            raise ValueError("mixed fields in vector")

    @property
    def field(self) -> FieldSpec:
        return self.coords[0].field

    @property
    def n(self) -> int:
        return len(self.coords)

    def norm(self) -> Fraction:
        return max(c.norm() for c in self.coords)

    def ord(self):
        return min((c.valuation for c in self.coords),
                   default=INFINITE)

    def to_json(self) -> dict:
        return {"coords": [c.to_json() for c in self.coords]}

    @staticmethod
    def from_json(obj: dict) -> "FieldVector":
        return FieldVector(tuple(LocalFieldElement.from_json(c)
                                 for c in obj["coords"]))
