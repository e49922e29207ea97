"""Arithmetic in small finite fields GF(p^e).

Elements are identified with integers through ``idx(a) = sum(rep[i] * p**i)``
where ``rep`` is the coefficient vector of ``a`` in the polynomial basis
``1, w, w^2, ...`` and ``w`` is a root of the field's modulus.  All the
vectorised code elsewhere in the package works on these integer codes and on
the dense tables exposed by :class:`FieldSpec`.
"""
from __future__ import annotations

import re
from functools import cached_property, lru_cache

import numpy as np

MAX_Q = 2**16
LOG_TABLE_MAX_Q = 2**12
DENSE_TABLE_MAX_Q = 256


class FieldError(ValueError):
    pass


class FieldMismatchError(FieldError, TypeError):
    """Raised when elements of two different fields meet in one operation."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    i = 2
    while i * i <= p:
        if p % i == 0:
            return False
        i += 1
    return True


# --- polynomials over F_p as coefficient lists, lowest degree first ---------

def _poly_trim(a):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a, m, p):
    a = _poly_trim(a)
    m = _poly_trim(m)
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) >= len(m):
        c = (a[-1] * inv_lead) % p
        shift = len(a) - len(m)
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        a = _poly_trim(a)
    return a


def _is_irreducible(modulus, p: int) -> bool:
    """Trial division by every monic polynomial of degree <= e/2."""
    e = len(modulus) - 1
    for k in range(1, e // 2 + 1):
        for tail in range(p**k):
            divisor = [(tail // p**i) % p for i in range(k)] + [1]
            if not _poly_mod(modulus, divisor, p):
                return False
    return True


@lru_cache(maxsize=None)
def default_modulus(p: int, e: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible of degree ``e`` over F_p.

    Candidates are ordered by the integer ``sum(c_i * p**i)`` of their
    non-leading coefficients; the result has length ``e + 1``.
    """
    if e == 1:
        return (0, 1)
    for code in range(p**e):
        low = [(code // p**i) % p for i in range(e)]
        if low[0] == 0:
            continue
        modulus = tuple(low + [1])
        if _is_irreducible(modulus, p):
            return modulus
    raise FieldError(f"no irreducible polynomial of degree {e} over F_{p}")  # pragma: no cover


class FieldSpec:
    """The field GF(p^e).  Use :func:`GF` to obtain the shared instance."""

    def __init__(self, p: int, e: int = 1):
        if not _is_prime(p):
            raise FieldError(f"characteristic {p} is not prime")
        if e < 1:
            raise FieldError("extension degree must be >= 1")
        if p**e > MAX_Q:
            raise FieldError(f"q = {p}^{e} exceeds the cap {MAX_Q}")
        self.p = p
        self.e = e
        self.q = p**e
        self.modulus = default_modulus(p, e)
        if e > 1 and not _is_irreducible(self.modulus, p):  # pragma: no cover
            raise FieldError("modulus is reducible")
        self._log = None
        self._exp = None
        if self.q <= LOG_TABLE_MAX_Q:
            self._build_log_tables()

    def __repr__(self):
        return f"GF({self.p}^{self.e})" if self.e > 1 else f"GF({self.p})"

    def __reduce__(self):
        return (GF, (self.p, self.e))

    # -- integer-code level arithmetic --------------------------------------

    def digits(self, a: int) -> list[int]:
        return [(a // self.p**i) % self.p for i in range(self.e)]

    def from_digits(self, digits) -> int:
        return sum((int(d) % self.p) * self.p**i for i, d in enumerate(digits))

    def add_int(self, a: int, b: int) -> int:
        if self.e == 1:
            return (a + b) % self.p
        if self.p == 2:
            return a ^ b
        return self.from_digits(x + y for x, y in zip(self.digits(a), self.digits(b)))

    def neg_int(self, a: int) -> int:
        if self.e == 1:
            return (-a) % self.p
        if self.p == 2:
            return a
        return self.from_digits(-x for x in self.digits(a))

    def sub_int(self, a: int, b: int) -> int:
        return self.add_int(a, self.neg_int(b))

    def _mul_schoolbook(self, a: int, b: int) -> int:
        x, y = self.digits(a), self.digits(b)
        prod = [0] * (2 * self.e - 1)
        for i, xi in enumerate(x):
            if xi:
                for j, yj in enumerate(y):
                    prod[i + j] = (prod[i + j] + xi * yj) % self.p
        rem = _poly_mod(prod, list(self.modulus), self.p)
        return self.from_digits(rem + [0] * (self.e - len(rem)))

    def _build_log_tables(self):
        q = self.q
        for g in range(1, q):
            exp = np.zeros(2 * q, dtype=np.int64)
            x = 1
            seen = set()
            for k in range(q - 1):
                if x in seen:
                    break
                seen.add(x)
                exp[k] = x
                x = self._mul_schoolbook(x, g)
            if len(seen) == q - 1:
                break
        exp[q - 1 : 2 * (q - 1)] = exp[: q - 1]
        log = np.full(q, -1, dtype=np.int64)
        log[exp[: q - 1]] = np.arange(q - 1)
        self.generator = g
        self._exp = exp
        self._log = log

    def mul_int(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        if self.e == 1:
            return (a * b) % self.p
        if self._log is not None:
            return int(self._exp[self._log[a] + self._log[b]])
        return self._mul_schoolbook(a, b)

    def pow_int(self, a: int, k: int) -> int:
        if k < 0:
            return self.pow_int(self.inv_int(a), -k)
        if a == 0:
            return 1 if k == 0 else 0
        if self._log is not None:
            return int(self._exp[(self._log[a] * k) % (self.q - 1)])
        result, base = 1, a
        while k:
            if k & 1:
                result = self.mul_int(result, base)
            base = self.mul_int(base, base)
            k >>= 1
        return result

    def inv_int(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in " + repr(self))
        if self.e == 1:
            return pow(a, self.p - 2, self.p)
        return self.pow_int(a, self.q - 2)

    def sqrt_int(self, a: int) -> int | None:
        """Deterministic square root (the smaller code of the two), or None."""
        if a == 0:
            return 0
        if self.p == 2:
            return self.pow_int(a, self.q // 2)
        if self._log is not None:
            la = int(self._log[a])
            if la % 2:
                return None
            r = int(self._exp[la // 2])
            return min(r, self.neg_int(r))
        for r in range(1, self.q):
            if self.mul_int(r, r) == a:
                return r
        return None

    # -- dense tables for vectorised kernels --------------------------------

    def _require_dense(self):
        if self.q > DENSE_TABLE_MAX_Q:
            raise FieldError(f"dense tables are only built for q <= {DENSE_TABLE_MAX_Q}")

    @cached_property
    def add_table(self) -> np.ndarray:
        self._require_dense()
        d = self.digit_table
        s = (d[:, None, :] + d[None, :, :]) % self.p
        return (s * self.p ** np.arange(self.e)).sum(axis=-1).astype(np.int64)

    @cached_property
    def mul_table(self) -> np.ndarray:
        self._require_dense()
        q = self.q
        t = np.zeros((q, q), dtype=np.int64)
        for a in range(1, q):
            for b in range(a, q):
                t[a, b] = t[b, a] = self.mul_int(a, b)
        return t

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.array([self.neg_int(a) for a in range(self.q)], dtype=np.int64)

    @cached_property
    def inv_table(self) -> np.ndarray:
        """``inv_table[0]`` is 0 by convention; callers must mask zeros."""
        return np.array([0] + [self.inv_int(a) for a in range(1, self.q)], dtype=np.int64)

    @cached_property
    def digit_table(self) -> np.ndarray:
        """``(q, e)`` array of base-field digits of every element."""
        a = np.arange(self.q)
        return ((a[:, None] // self.p ** np.arange(self.e)) % self.p).astype(np.int64)

    def mul_matrix(self, a: int) -> np.ndarray:
        """Matrix over F_p of x -> a*x acting on digit row vectors."""
        rows = [self.digits(self.mul_int(a, self.p**j)) for j in range(self.e)]
        return np.array(rows, dtype=np.int64)

    def linear_map_fp(self, A) -> np.ndarray:
        """Expand an F_q matrix ``A`` (K x M codes) into an F_p matrix.

        The result ``B`` has shape ``(M*e, K*e)`` and satisfies
        ``digits(c) @ B == digits(A @ c) (mod p)`` for digit row vectors.
        """
        A = np.asarray(A, dtype=np.int64)
        K, M = A.shape
        e = self.e
        blocks = {int(a): self.mul_matrix(int(a)) for a in np.unique(A)}
        B = np.zeros((M * e, K * e), dtype=np.int64)
        for k in range(K):
            for m in range(M):
                a = int(A[k, m])
                if a:
                    B[m * e : (m + 1) * e, k * e : (k + 1) * e] = blocks[a]
        return B

    # -- element level --------------------------------------------------------

    def __call__(self, value) -> "FieldElement":
        return self.element(value)

    def element(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            if value.spec is not self:
                raise FieldMismatchError(f"{value!r} is not in {self!r}")
            return value
        if isinstance(value, str):
            return FieldElement(self, parse_element(value, self))
        if isinstance(value, (int, np.integer)):
            value = int(value)
            if self.e == 1:
                return FieldElement(self, value % self.p)
            if not 0 <= value < self.q:
                raise FieldError(f"element code {value} out of range for {self!r}")
            return FieldElement(self, value)
        raise TypeError(f"cannot convert {value!r} to an element of {self!r}")

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, 0)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, 1)

    @property
    def w(self) -> "FieldElement":
        """Root of the modulus (the generator symbol ``w``)."""
        return FieldElement(self, self.p if self.e > 1 else 0)


@lru_cache(maxsize=None)
def _shared(p: int, e: int) -> FieldSpec:
    return FieldSpec(p, e)


def GF(p: int, e: int = 1) -> FieldSpec:
    """Shared :class:`FieldSpec` for GF(p^e); the same object per ``(p, e)``."""
    return _shared(int(p), int(e))


def field_of_order(q: int) -> FieldSpec:
    for p in range(2, q + 1):
        if q % p == 0:
            e, r = 0, q
            while r % p == 0:
                r //= p
                e += 1
            if r != 1:
                break
            return GF(p, e)
    raise FieldError(f"{q} is not a prime power")


class FieldElement:
    __slots__ = ("spec", "idx")

    def __init__(self, spec: FieldSpec, idx: int):
        self.spec = spec
        self.idx = int(idx)

    @property
    def rep(self) -> list[int]:
        return self.spec.digits(self.idx)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.spec is not self.spec:
                raise FieldMismatchError(f"cannot combine {self.spec!r} and {other.spec!r}")
            return other.idx
        if isinstance(other, (int, np.integer)):
            return self.spec.element(int(other) % self.spec.p).idx
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.spec, self.spec.add_int(self.idx, b))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.spec, self.spec.neg_int(self.idx))

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.spec, self.spec.sub_int(self.idx, b))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.spec, self.spec.mul_int(self.idx, b))

    __rmul__ = __mul__

    def inverse(self):
        return FieldElement(self.spec, self.spec.inv_int(self.idx))

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self * FieldElement(self.spec, self.spec.inv_int(b))

    def __pow__(self, k: int):
        return FieldElement(self.spec, self.spec.pow_int(self.idx, int(k)))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.spec is other.spec and self.idx == other.idx
        if isinstance(other, int):
            return self.idx == self.spec.element(other % self.spec.p).idx
        return NotImplemented

    def __hash__(self):
        return hash((self.spec.p, self.spec.e, self.idx))

    def __bool__(self):
        return self.idx != 0

    def __int__(self):
        return self.idx

    def __repr__(self):
        return format_element(self.idx, self.spec)

    __str__ = __repr__


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def power(a: FieldElement, k: int) -> FieldElement:
    if k < 0:
        raise ValueError("exponent must be non-negative")
    return a**k


def frobenius(a: FieldElement, base_q: int) -> FieldElement:
    """Return ``a ** base_q``; ``base_q`` must be ``p**m`` with ``1 <= m <= e``."""
    spec = a.spec
    m, r = 0, base_q
    while r > 1 and r % spec.p == 0:
        r //= spec.p
        m += 1
    if r != 1 or m < 1:
        raise FieldError(f"{base_q} is not a power of the characteristic {spec.p}")
    if m > spec.e:
        raise FieldError(f"{base_q} exceeds the field size {spec.q}")
    return a**base_q


def enumerate_elements(spec: FieldSpec) -> list[FieldElement]:
    return [FieldElement(spec, i) for i in range(spec.q)]


# --- element text syntax ------------------------------------------------------

def format_element(idx: int, spec: FieldSpec) -> str:
    if spec.e == 1:
        return str(idx)
    terms = []
    for power_, c in reversed(list(enumerate(spec.digits(idx)))):
        if c == 0:
            continue
        mono = "" if power_ == 0 else ("w" if power_ == 1 else f"w^{power_}")
        if not mono:
            terms.append(str(c))
        elif c == 1:
            terms.append(mono)
        else:
            terms.append(f"{c}*{mono}")
    return "+".join(terms) if terms else "0"


_ELEMENT_TERM = re.compile(r"^(?:(\d+)\*?)?(w(?:\^(\d+))?)?$")


def parse_element(text: str, spec: FieldSpec) -> int:
    """Parse ``"2"``, ``"w"``, ``"w+1"``, ``"2*w^2+w"`` into an element code."""
    s = text.replace(" ", "")
    if not s:
        raise FieldError("empty element")
    s = s.replace("-", "+-")
    total = 0
    for raw in s.split("+"):
        if not raw:
            continue
        negate = raw.startswith("-")
        term = raw.lstrip("-")
        m = _ELEMENT_TERM.match(term)
        if not m or not (m.group(1) or m.group(2)):
            raise FieldError(f"bad element syntax: {text!r}")
        coeff = int(m.group(1)) if m.group(1) else 1
        if m.group(2):
            if spec.e == 1:
                raise FieldError(f"symbol 'w' is undefined in prime field {spec!r}")
            k = int(m.group(3)) if m.group(3) else 1
            value = spec.mul_int(coeff % spec.p, spec.pow_int(spec.p, k))
        else:
            value = coeff % spec.p
        if negate:
            value = spec.neg_int(value)
        total = spec.add_int(total, value)
    return total


# --- bit-sliced GF(4) -----------------------------------------------------------
# An array of GF(4) codes is carried as two bitplanes (lo, hi) with
# code = lo + 2*hi, i.e. element lo + hi*w where w^2 = w + 1.  Each bit lane is
# an independent element, so one uint64 word holds 64 elements.

def f4_to_planes(codes) -> tuple[np.ndarray, np.ndarray]:
    """Pack a ``(..., B)`` array of GF(4) codes into uint64 bitplanes."""
    codes = np.asarray(codes, dtype=np.uint8)
    B = codes.shape[-1]
    pad = (-B) % 64
    if pad:
        codes = np.concatenate([codes, np.zeros(codes.shape[:-1] + (pad,), np.uint8)], axis=-1)
    lo = np.packbits((codes & 1).astype(bool), axis=-1, bitorder="little")
    hi = np.packbits((codes >> 1).astype(bool), axis=-1, bitorder="little")
    return np.ascontiguousarray(lo).view(np.uint64), np.ascontiguousarray(hi).view(np.uint64)


def f4_from_planes(lo, hi, count: int) -> np.ndarray:
    lo_bits = np.unpackbits(np.ascontiguousarray(lo).view(np.uint8), axis=-1, bitorder="little")
    hi_bits = np.unpackbits(np.ascontiguousarray(hi).view(np.uint8), axis=-1, bitorder="little")
    return (lo_bits + 2 * hi_bits)[..., :count]


def f4_mul_const(c: int, lo, hi):
    """Multiply every lane by the constant code ``c``; returns new planes."""
    if c == 0:
        return np.zeros_like(lo), np.zeros_like(hi)
    if c == 1:
        return lo, hi
    if c == 2:  # w
        return hi, lo ^ hi
    if c == 3:  # w + 1
        return lo ^ hi, lo
    raise FieldError(f"{c} is not a GF(4) code")
