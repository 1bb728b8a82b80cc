"""Parametric IEEE-754 binary formats and correctly rounded arithmetic.

Values are carried as raw bit patterns.  Every finite value decodes to
``(sign, m, e)`` meaning ``(-1)**sign * m * 2**e`` with an integer
significand, so all arithmetic is exact integer work followed by a single
rounding step.

The *ordinal* of a non-NaN value is its rank in the total order
``-inf < ... < -0 < +0 < ... < +inf``; neighbouring representable values
differ by exactly one.  Ordinals are what the interval domains store.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Tuple

from .errors import AtBoundary, FpError, NaNHasNoOrdinal

RNE, RNA, RTP, RTN, RTZ = "RNE", "RNA", "RTP", "RTN", "RTZ"
ROUNDING_MODES = (RNE, RNA, RTP, RTN, RTZ)

MODE_ALIASES = {
    "RNE": RNE,
    "roundNearestTiesToEven": RNE,
    "RNA": RNA,
    "roundNearestTiesToAway": RNA,
    "RTP": RTP,
    "roundTowardPositive": RTP,
    "RTN": RTN,
    "roundTowardNegative": RTN,
    "RTZ": RTZ,
    "roundTowardZero": RTZ,
}

# decoded forms
NAN = ("nan",)


@dataclass(frozen=True)
class FpFormat:
    """Binary interchange-style format with ``ebits`` exponent bits and
    ``sbits`` significand bits (hidden bit included)."""

    ebits: int
    sbits: int
    bias: int = field(init=False, repr=False, compare=False)
    emin: int = field(init=False, repr=False, compare=False)
    emax: int = field(init=False, repr=False, compare=False)
    width: int = field(init=False, repr=False, compare=False)
    sign_mask: int = field(init=False, repr=False, compare=False)
    exp_mask: int = field(init=False, repr=False, compare=False)
    frac_mask: int = field(init=False, repr=False, compare=False)
    max_ordinal: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.ebits < 2 or self.sbits < 2:
            raise FpError(f"invalid format ({self.ebits}, {self.sbits}): ebits and sbits must be >= 2")
        fb = self.sbits - 1
        bias = (1 << (self.ebits - 1)) - 1
        setattr_ = object.__setattr__
        setattr_(self, "bias", bias)
        setattr_(self, "emin", 1 - bias)
        setattr_(self, "emax", bias)
        setattr_(self, "width", 1 + self.ebits + fb)
        setattr_(self, "sign_mask", 1 << (self.ebits + fb))
        setattr_(self, "exp_mask", ((1 << self.ebits) - 1) << fb)
        setattr_(self, "frac_mask", (1 << fb) - 1)
        # ordinal of +inf; -inf is -max_ordinal - 1
        setattr_(self, "max_ordinal", ((1 << self.ebits) - 1) << fb)

    @property
    def min_ordinal(self) -> int:
        return -self.max_ordinal - 1

    @property
    def quantum_min(self) -> int:
        """Exponent of the smallest subnormal."""
        return self.emin - (self.sbits - 1)

    @property
    def nan_bits(self) -> int:
        return self.exp_mask | (1 << (self.sbits - 2))

    def __str__(self):
        return f"(_ FloatingPoint {self.ebits} {self.sbits})"

    # -- bit level ---------------------------------------------------------

    def is_nan_bits(self, bits: int) -> bool:
        return (bits & self.exp_mask) == self.exp_mask and (bits & self.frac_mask) != 0

    def decode(self, bits: int):
        """Decode a bit pattern into ``NAN``, ``("inf", s)`` or ``("fin", s, m, e)``."""
        fb = self.sbits - 1
        s = 1 if bits & self.sign_mask else 0
        ef = (bits & self.exp_mask) >> fb
        f = bits & self.frac_mask
        if ef == (1 << self.ebits) - 1:
            return NAN if f else ("inf", s)
        if ef == 0:
            return ("fin", s, f, self.quantum_min)
        return ("fin", s, f | (1 << fb), ef - self.bias - fb)

    def round(self, mode: str, sign: int, num: int, den: int = 1, exp2: int = 0) -> int:
        """Bits of ``(-1)**sign * num/den * 2**exp2`` rounded in ``mode``.

        ``num`` must be positive; exact zeros are the caller's business
        because their sign depends on the operation.
        """
        p = self.sbits
        t = num.bit_length() - den.bit_length()
        if t >= 0:
            if num < (den << t):
                t -= 1
        elif (num << -t) < den:
            t -= 1
        e = t + exp2
        q = max(e, self.emin) - (p - 1)
        s = exp2 - q
        if s >= 0:
            m, r = divmod(num << s, den)
            d2 = den
        else:
            d2 = den << -s
            m, r = divmod(num, d2)
        if r:
            if mode == RNE:
                c = 2 * r - d2
                up = c > 0 or (c == 0 and m & 1)
            elif mode == RNA:
                up = 2 * r >= d2
            elif mode == RTZ:
                up = False
            elif mode == RTP:
                up = sign == 0
            elif mode == RTN:
                up = sign == 1
            else:
                raise FpError(f"unknown rounding mode {mode!r}")
            if up:
                m += 1
        if m == 0:
            return self.sign_mask if sign else 0
        if m.bit_length() > p:
            m >>= 1
            q += 1
        if q + m.bit_length() - 1 > self.emax:
            return self._overflow(mode, sign)
        sbit = self.sign_mask if sign else 0
        if m.bit_length() < p:
            return sbit | m
        return sbit | ((q + (p - 1) + self.bias) << (p - 1)) | (m - (1 << (p - 1)))

    def _overflow(self, mode: str, sign: int) -> int:
        inf = self.exp_mask
        big = self.exp_mask - 1
        if mode in (RNE, RNA):
            mag = inf
        elif mode == RTZ:
            mag = big
        elif mode == RTP:
            mag = big if sign else inf
        else:
            mag = inf if sign else big
        return (self.sign_mask if sign else 0) | mag

    # -- ordinals ----------------------------------------------------------

    def ordinal(self, bits: int) -> int:
        if self.is_nan_bits(bits):
            raise NaNHasNoOrdinal("NaN has no ordinal")
        mag = bits & ~self.sign_mask
        return -mag - 1 if bits & self.sign_mask else mag

    def from_ordinal(self, o: int) -> int:
        if o >= 0:
            return o
        return self.sign_mask | (-o - 1)

    def ordinal_of_fraction(self, q: Fraction, mode: str = RNE) -> int:
        return self.ordinal(fraction_to_bits(self, q, mode))

    def value_fraction(self, o: int) -> Optional[Fraction]:
        """Exact real value of a finite ordinal, None for infinities."""
        d = self.decode(self.from_ordinal(o))
        if d[0] != "fin":
            return None
        _, s, m, e = d
        v = Fraction(m) * (Fraction(2) ** e)
        return -v if s else v


BINARY16 = FpFormat(5, 11)
BINARY32 = FpFormat(8, 24)
BINARY64 = FpFormat(11, 53)


def fraction_to_bits(fmt: FpFormat, q: Fraction, mode: str = RNE, negative_zero: bool = False) -> int:
    q = Fraction(q)
    if q == 0:
        return fmt.sign_mask if negative_zero else 0
    sign = 1 if q < 0 else 0
    q = abs(q)
    return fmt.round(mode, sign, q.numerator, q.denominator)


def float_to_bits(fmt: FpFormat, x: float, mode: str = RNE) -> int:
    if x != x:
        return fmt.nan_bits
    if x in (float("inf"), float("-inf")):
        return fmt.exp_mask | (fmt.sign_mask if x < 0 else 0)
    if x == 0:
        neg = str(x).startswith("-")
        return fmt.sign_mask if neg else 0
    return fraction_to_bits(fmt, Fraction(x), mode)


# -- arithmetic on bit patterns ---------------------------------------------


def _neg_bits(fmt: FpFormat, b: int) -> int:
    return b if fmt.is_nan_bits(b) else b ^ fmt.sign_mask


def fp_neg(fmt: FpFormat, a: int) -> int:
    return _neg_bits(fmt, a)


def fp_abs(fmt: FpFormat, a: int) -> int:
    return a if fmt.is_nan_bits(a) else a & ~fmt.sign_mask


def fp_add(fmt: FpFormat, mode: str, a: int, b: int) -> int:
    da, db = fmt.decode(a), fmt.decode(b)
    if da is NAN or db is NAN:
        return fmt.nan_bits
    if da[0] == "inf":
        if db[0] == "inf" and db[1] != da[1]:
            return fmt.nan_bits
        return a
    if db[0] == "inf":
        return b
    _, s1, m1, e1 = da
    _, s2, m2, e2 = db
    if m1 == 0 and m2 == 0:
        if s1 == s2:
            return a
        return fmt.sign_mask if mode == RTN else 0
    e = min(e1, e2)
    v = (-m1 if s1 else m1) << (e1 - e)
    v += (-m2 if s2 else m2) << (e2 - e)
    if v == 0:
        return fmt.sign_mask if mode == RTN else 0
    return fmt.round(mode, 1 if v < 0 else 0, abs(v), 1, e)


def fp_sub(fmt: FpFormat, mode: str, a: int, b: int) -> int:
    return fp_add(fmt, mode, a, _neg_bits(fmt, b))


def fp_mul(fmt: FpFormat, mode: str, a: int, b: int) -> int:
    da, db = fmt.decode(a), fmt.decode(b)
    if da is NAN or db is NAN:
        return fmt.nan_bits
    s = da[1] ^ db[1]
    sbit = fmt.sign_mask if s else 0
    if da[0] == "inf" or db[0] == "inf":
        if (da[0] == "fin" and da[2] == 0) or (db[0] == "fin" and db[2] == 0):
            return fmt.nan_bits
        return sbit | fmt.exp_mask
    _, _, m1, e1 = da
    _, _, m2, e2 = db
    if m1 == 0 or m2 == 0:
        return sbit
    return fmt.round(mode, s, m1 * m2, 1, e1 + e2)


def fp_div(fmt: FpFormat, mode: str, a: int, b: int) -> int:
    da, db = fmt.decode(a), fmt.decode(b)
    if da is NAN or db is NAN:
        return fmt.nan_bits
    s = da[1] ^ db[1]
    sbit = fmt.sign_mask if s else 0
    if da[0] == "inf":
        if db[0] == "inf":
            return fmt.nan_bits
        return sbit | fmt.exp_mask
    if db[0] == "inf":
        return sbit
    _, _, m1, e1 = da
    _, _, m2, e2 = db
    if m2 == 0:
        return fmt.nan_bits if m1 == 0 else sbit | fmt.exp_mask
    if m1 == 0:
        return sbit
    return fmt.round(mode, s, m1, m2, e1 - e2)


def fp_min(fmt: FpFormat, a: int, b: int) -> int:
    """fp.min with opposite zeros resolved by ordinal order (-0 < +0)."""
    if fmt.is_nan_bits(a):
        return b
    if fmt.is_nan_bits(b):
        return a
    return a if fmt.ordinal(a) <= fmt.ordinal(b) else b


def fp_max(fmt: FpFormat, a: int, b: int) -> int:
    if fmt.is_nan_bits(a):
        return b
    if fmt.is_nan_bits(b):
        return a
    return a if fmt.ordinal(a) >= fmt.ordinal(b) else b


ARITH = {"add": fp_add, "sub": fp_sub, "mul": fp_mul, "div": fp_div}


def real_key(o: int) -> int:
    """Ordinal key under which -0 and +0 compare equal."""
    return 0 if o == -1 else o


def fp_lt(fmt: FpFormat, a: int, b: int) -> bool:
    if fmt.is_nan_bits(a) or fmt.is_nan_bits(b):
        return False
    return real_key(fmt.ordinal(a)) < real_key(fmt.ordinal(b))


def fp_leq(fmt: FpFormat, a: int, b: int) -> bool:
    if fmt.is_nan_bits(a) or fmt.is_nan_bits(b):
        return False
    return real_key(fmt.ordinal(a)) <= real_key(fmt.ordinal(b))


def fp_eq(fmt: FpFormat, a: int, b: int) -> bool:
    if fmt.is_nan_bits(a) or fmt.is_nan_bits(b):
        return False
    return real_key(fmt.ordinal(a)) == real_key(fmt.ordinal(b))


def same_value(fmt: FpFormat, a: int, b: int) -> bool:
    """SMT-LIB ``=`` on floats: NaN equals NaN, -0 differs from +0."""
    na, nb = fmt.is_nan_bits(a), fmt.is_nan_bits(b)
    if na or nb:
        return na and nb
    return a == b


# -- value object -----------------------------------------------------------


@dataclass(frozen=True)
class FpValue:
    """A value of ``fmt`` given by its bit pattern.  NaN patterns are
    canonicalised so that all NaNs compare equal."""

    fmt: FpFormat
    bits: int

    def __post_init__(self):
        if not 0 <= self.bits < (1 << self.fmt.width):
            raise FpError(f"bit pattern out of range for {self.fmt}")
        if self.fmt.is_nan_bits(self.bits) and self.bits != self.fmt.nan_bits:
            object.__setattr__(self, "bits", self.fmt.nan_bits)

    @classmethod
    def from_fields(cls, fmt: FpFormat, sign: int, exponent: int, fraction: int) -> "FpValue":
        return cls(fmt, (sign << (fmt.width - 1)) | (exponent << (fmt.sbits - 1)) | fraction)

    @classmethod
    def from_ordinal(cls, fmt: FpFormat, o: int) -> "FpValue":
        if not fmt.min_ordinal <= o <= fmt.max_ordinal:
            raise FpError(f"ordinal {o} out of range for {fmt}")
        return cls(fmt, fmt.from_ordinal(o))

    @classmethod
    def from_fraction(cls, fmt: FpFormat, q, mode: str = RNE) -> "FpValue":
        return cls(fmt, fraction_to_bits(fmt, Fraction(q), mode))

    @classmethod
    def from_float(cls, fmt: FpFormat, x: float, mode: str = RNE) -> "FpValue":
        return cls(fmt, float_to_bits(fmt, x, mode))

    @classmethod
    def nan(cls, fmt: FpFormat) -> "FpValue":
        return cls(fmt, fmt.nan_bits)

    @classmethod
    def inf(cls, fmt: FpFormat, negative: bool = False) -> "FpValue":
        return cls(fmt, fmt.exp_mask | (fmt.sign_mask if negative else 0))

    @classmethod
    def zero(cls, fmt: FpFormat, negative: bool = False) -> "FpValue":
        return cls(fmt, fmt.sign_mask if negative else 0)

    @property
    def fields(self) -> Tuple[int, int, int]:
        fb = self.fmt.sbits - 1
        return (
            self.bits >> (self.fmt.width - 1),
            (self.bits & self.fmt.exp_mask) >> fb,
            self.bits & self.fmt.frac_mask,
        )

    @property
    def is_nan(self) -> bool:
        return self.fmt.is_nan_bits(self.bits)

    @property
    def is_inf(self) -> bool:
        return (self.bits & ~self.fmt.sign_mask) == self.fmt.exp_mask

    @property
    def is_zero(self) -> bool:
        return (self.bits & ~self.fmt.sign_mask) == 0

    @property
    def is_negative(self) -> bool:
        return not self.is_nan and bool(self.bits & self.fmt.sign_mask)

    def classify(self) -> str:
        _, ef, f = self.fields
        top = (1 << self.fmt.ebits) - 1
        if ef == top:
            return "nan" if f else "infinite"
        if ef == 0:
            return "zero" if f == 0 else "subnormal"
        return "normal"

    def ordinal(self) -> int:
        return self.fmt.ordinal(self.bits)

    def succ(self) -> "FpValue":
        o = self.ordinal()
        if o >= self.fmt.max_ordinal:
            raise AtBoundary("no successor of +oo")
        return FpValue.from_ordinal(self.fmt, o + 1)

    def pred(self) -> "FpValue":
        o = self.ordinal()
        if o <= self.fmt.min_ordinal:
            raise AtBoundary("no predecessor of -oo")
        return FpValue.from_ordinal(self.fmt, o - 1)

    def to_fraction(self) -> Fraction:
        d = self.fmt.decode(self.bits)
        if d[0] != "fin":
            raise FpError(f"{self} is not finite")
        _, s, m, e = d
        v = Fraction(m) * (Fraction(2) ** e)
        return -v if s else v

    def __float__(self) -> float:
        if self.is_nan:
            return float("nan")
        if self.is_inf:
            return float("-inf") if self.is_negative else float("inf")
        if self.is_zero:
            return -0.0 if self.is_negative else 0.0
        return float(self.to_fraction())

    def to_smtlib(self) -> str:
        e, s = self.fmt.ebits, self.fmt.sbits
        if self.is_nan:
            return f"(_ NaN {e} {s})"
        if self.is_inf:
            return f"(_ {'-' if self.is_negative else '+'}oo {e} {s})"
        if self.is_zero:
            return f"(_ {'-' if self.is_negative else '+'}zero {e} {s})"
        sign, ef, f = self.fields
        return f"(fp #b{sign} #b{ef:0{e}b} #b{f:0{s - 1}b})"

    def __str__(self):
        return self.to_smtlib()
