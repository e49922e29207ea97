"""Homogeneous forms over F_q.

A :class:`HomogeneousForm` stores its nonzero coefficients as a dict from
exponent tuples to element codes.  Monomials of a fixed ``(n_vars, degree)``
have a frozen graded-lex order (lexicographically descending exponents, so
``x0^d`` comes first); coefficient vectors and integer codes of forms follow
this order.

Operations that can produce the zero polynomial (derivatives, restriction to
a hyperplane) return ``None`` for it instead of constructing a zero form.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .gf import FieldSpec, GF, FieldError, format_element, frobenius, FieldElement
from .projgeom import Hyperplane, ProjLine, ProjPoint, ProjectiveMap, rref

MONOMIAL_ORDER_VERSION = 1


class FormError(ValueError):
    pass


class ZeroFormError(FormError):
    pass


@lru_cache(maxsize=None)
def monomials(n_vars: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent vectors of the given degree in graded-lex order."""
    if n_vars == 1:
        return ((degree,),)
    out = []
    for a in range(degree, -1, -1):
        out.extend((a,) + rest for rest in monomials(n_vars - 1, degree - a))
    return tuple(out)


@lru_cache(maxsize=None)
def monomial_index(n_vars: int, degree: int) -> dict:
    return {m: i for i, m in enumerate(monomials(n_vars, degree))}


# --- sparse polynomial helpers (dict exponent -> code) ---------------------------

def _padd(a: dict, b: dict, spec: FieldSpec) -> dict:
    out = dict(a)
    for m, c in b.items():
        v = spec.add_int(out.get(m, 0), c)
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def _pscale(a: dict, c: int, spec: FieldSpec) -> dict:
    if c == 0:
        return {}
    return {m: spec.mul_int(c, v) for m, v in a.items()}


def _pmul(a: dict, b: dict, spec: FieldSpec) -> dict:
    out: dict = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            v = spec.add_int(out.get(m, 0), spec.mul_int(ca, cb))
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def _ppow(a: dict, k: int, n_vars: int, spec: FieldSpec) -> dict:
    result = {(0,) * n_vars: 1}
    base = a
    while k:
        if k & 1:
            result = _pmul(result, base, spec)
        k >>= 1
        if k:
            base = _pmul(base, base, spec)
    return result


class HomogeneousForm:
    """A nonzero homogeneous polynomial; its zero set is the hypersurface."""

    __slots__ = ("spec", "n_vars", "degree", "coeffs", "_hash")

    def __init__(self, spec: FieldSpec, n_vars: int, degree: int, coeffs: dict):
        clean = {}
        for m, c in coeffs.items():
            m = tuple(int(x) for x in m)
            if len(m) != n_vars:
                raise FormError(f"exponent {m} does not have {n_vars} entries")
            if sum(m) != degree or min(m) < 0:
                raise FormError(f"exponent {m} is not of degree {degree}")
            c = c.idx if isinstance(c, FieldElement) else int(c)
            if not 0 <= c < spec.q:
                raise FormError(f"coefficient code {c} out of range")
            if c:
                clean[m] = c
        if not clean:
            raise ZeroFormError("the zero polynomial does not define a hypersurface")
        self.spec = spec
        self.n_vars = n_vars
        self.degree = degree
        self.coeffs = clean
        self._hash = None

    @property
    def n(self) -> int:
        """Dimension of the ambient projective space."""
        return self.n_vars - 1

    @classmethod
    def from_vector(cls, spec: FieldSpec, n_vars: int, degree: int, vector) -> "HomogeneousForm":
        mons = monomials(n_vars, degree)
        vector = [int(c) for c in vector]
        if len(vector) != len(mons):
            raise FormError(f"expected {len(mons)} coefficients, got {len(vector)}")
        return cls(spec, n_vars, degree, dict(zip(mons, vector)))

    @classmethod
    def from_code(cls, spec: FieldSpec, n_vars: int, degree: int, code: int) -> "HomogeneousForm":
        M = len(monomials(n_vars, degree))
        digits = [(code // spec.q ** (M - 1 - i)) % spec.q for i in range(M)]
        return cls.from_vector(spec, n_vars, degree, digits)

    def vector(self) -> np.ndarray:
        mons = monomials(self.n_vars, self.degree)
        return np.array([self.coeffs.get(m, 0) for m in mons], dtype=np.int64)

    def code(self) -> int:
        """Base-q integer of the coefficient vector, first monomial most significant."""
        value = 0
        for c in self.vector():
            value = value * self.spec.q + int(c)
        return value

    def normalized(self) -> "HomogeneousForm":
        """Scalar multiple whose first nonzero coefficient is 1."""
        for m in monomials(self.n_vars, self.degree):
            if m in self.coeffs:
                return self.scale(self.spec.inv_int(self.coeffs[m]))
        raise AssertionError("unreachable")

    def scale(self, c) -> "HomogeneousForm":
        c = c.idx if isinstance(c, FieldElement) else int(c)
        return HomogeneousForm(self.spec, self.n_vars, self.degree, _pscale(self.coeffs, c, self.spec))

    def __mul__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        self._check_compatible(other)
        return HomogeneousForm(
            self.spec, self.n_vars, self.degree + other.degree, _pmul(self.coeffs, other.coeffs, self.spec)
        )

    def __add__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        """Sum of two forms of equal degree; raises ZeroFormError if they cancel."""
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        self._check_compatible(other)
        if other.degree != self.degree:
            raise FormError("cannot add forms of different degree")
        return HomogeneousForm(self.spec, self.n_vars, self.degree, _padd(self.coeffs, other.coeffs, self.spec))

    def __pow__(self, k: int) -> "HomogeneousForm":
        return HomogeneousForm(
            self.spec, self.n_vars, self.degree * k, _ppow(self.coeffs, k, self.n_vars, self.spec)
        )

    def _check_compatible(self, other):
        if other.spec is not self.spec:
            raise FormError(f"forms over {self.spec!r} and {other.spec!r}")
        if other.n_vars != self.n_vars:
            raise FormError("forms in different numbers of variables")

    def __eq__(self, other):
        if not isinstance(other, HomogeneousForm):
            return NotImplemented
        return (
            self.spec is other.spec
            and self.n_vars == other.n_vars
            and self.degree == other.degree
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.spec.q, self.n_vars, self.degree, frozenset(self.coeffs.items())))
        return self._hash

    def __repr__(self):
        return f"HomogeneousForm({format_form(self)!r}, {self.spec!r})"

    def __str__(self):
        return format_form(self)


@dataclass(frozen=True)
class BinaryForm:
    """``sum(coeffs[k] * s^(d-k) * t^k)``; all-zero coefficients mean "identically zero"."""

    spec: FieldSpec
    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def evaluate(self, s: int, t: int) -> int:
        spec, d = self.spec, self.degree
        acc = 0
        for k, c in enumerate(self.coeffs):
            if c:
                term = spec.mul_int(c, spec.mul_int(spec.pow_int(s, d - k), spec.pow_int(t, k)))
                acc = spec.add_int(acc, term)
        return acc

    def roots(self) -> list[tuple[int, int]]:
        """F_q-rational roots (s, t) in P^1, as (1, t) then (0, 1)."""
        params = [(1, t) for t in range(self.spec.q)] + [(0, 1)]
        return [st for st in params if self.evaluate(*st) == 0]


# --- text format ------------------------------------------------------------------

def format_form(f: HomogeneousForm) -> str:
    terms = []
    for m in monomials(f.n_vars, f.degree):
        c = f.coeffs.get(m)
        if not c:
            continue
        factors = []
        for i, a in enumerate(m):
            if a == 1:
                factors.append(f"x{i}")
            elif a > 1:
                factors.append(f"x{i}^{a}")
        cs = format_element(c, f.spec)
        if "+" in cs or "*" in cs:
            cs = f"({cs})"
        if not factors:
            terms.append(cs)
        elif c == 1:
            terms.append("*".join(factors))
        else:
            terms.append("*".join([cs] + factors))
    return " + ".join(terms)


_TOKEN = re.compile(r"\s*(?:(\d+)|(x\d+)|(w)|([-+*^()]))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormError(f"unknown symbol at position {pos}: {text[pos:pos + 10]!r}")
        if m.group(1):
            tokens.append(("num", int(m.group(1))))
        elif m.group(2):
            tokens.append(("var", int(m.group(2)[1:])))
        elif m.group(3):
            tokens.append(("w", None))
        else:
            tokens.append((m.group(4), None))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens, spec: FieldSpec, n_vars: int):
        self.tokens = tokens
        self.i = 0
        self.spec = spec
        self.n_vars = n_vars
        self.zero = (0,) * n_vars

    def peek(self):
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, kind=None):
        if self.i >= len(self.tokens):
            raise FormError(f"unexpected end of input, expected {kind or 'a token'!r}")
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            raise FormError(f"expected {kind!r}, found {tok[0]!r}")
        self.i += 1
        return tok

    def expr(self) -> dict:
        spec = self.spec
        if self.peek() == "-":
            self.take()
            acc = _pscale(self.term(), spec.neg_int(1), spec)
        else:
            acc = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()[0]
            t = self.term()
            if op == "-":
                t = _pscale(t, spec.neg_int(1), spec)
            acc = _padd(acc, t, spec)
        return acc

    def term(self) -> dict:
        acc = self.factor()
        while self.peek() in ("*", "num", "var", "w", "("):
            if self.peek() == "*":
                self.take()
            acc = _pmul(acc, self.factor(), self.spec)
        return acc

    def factor(self) -> dict:
        base = self.base()
        if self.peek() == "^":
            self.take()
            k = self.take("num")[1]
            base = _ppow(base, k, self.n_vars, self.spec)
        return base

    def base(self) -> dict:
        kind = self.peek()
        spec = self.spec
        if kind is None:
            raise FormError("unexpected end of input")
        if kind == "num":
            v = self.take()[1] % spec.p
            return {self.zero: v} if v else {}
        if kind == "w":
            self.take()
            if spec.e == 1:
                raise FormError(f"symbol 'w' is undefined in prime field {spec!r}")
            return {self.zero: spec.p}
        if kind == "var":
            i = self.take()[1]
            if i >= self.n_vars:
                raise FormError(f"variable x{i} out of range for {self.n_vars} variables")
            e = [0] * self.n_vars
            e[i] = 1
            return {tuple(e): 1}
        if kind == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        if kind == "-":
            self.take()
            return _pscale(self.factor(), spec.neg_int(1), spec)
        raise FormError(f"unexpected token {kind!r}")


def parse(text: str, spec: FieldSpec, n_vars: int | None = None) -> HomogeneousForm:
    """Parse a form written in ``x0..xn`` with coefficients in element syntax.

    ``n_vars`` defaults to one more than the largest variable index used.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise FormError("empty form")
    used = [v for kind, v in tokens if kind == "var"]
    if n_vars is None:
        if not used:
            raise FormError("no variables in form")
        n_vars = max(used) + 1
    parser = _Parser(tokens, spec, n_vars)
    poly = parser.expr()
    if parser.i != len(tokens):
        raise FormError(f"trailing input at token {parser.i}: {tokens[parser.i][0]!r}")
    if not poly:
        raise ZeroFormError(f"{text!r} is the zero form over {spec!r}")
    degrees = {sum(m) for m in poly}
    if len(degrees) != 1:
        raise FormError(f"inhomogeneous input: terms of degrees {sorted(degrees)}")
    return HomogeneousForm(spec, n_vars, degrees.pop(), poly)


def read_form_file(path) -> list[HomogeneousForm]:
    """Read ``field p e`` / ``vars k`` / ``degree d`` headers then one form per line."""
    spec = None
    n_vars = None
    degree = None
    forms = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        try:
            if head == "field":
                p, e = (int(x) for x in rest.split())
                spec = GF(p, e)
                continue
            if head == "vars":
                n_vars = int(rest)
                continue
            if head == "degree":
                degree = int(rest)
                continue
        except (ValueError, FieldError) as exc:
            raise FormError(f"{path}:{lineno}: bad header {line!r}: {exc}") from None
        if spec is None:
            raise FormError(f"{path}:{lineno}: form before the 'field p e' header")
        try:
            f = parse(line, spec, n_vars)
        except FormError as exc:
            raise FormError(f"{path}:{lineno}: {exc}") from None
        if degree is not None and f.degree != degree:
            raise FormError(f"{path}:{lineno}: form has degree {f.degree}, header says {degree}")
        forms.append(f)
    return forms


def write_form_file(path, forms, comment: str | None = None) -> None:
    forms = list(forms)
    if not forms:
        raise FormError("nothing to write")
    f0 = forms[0]
    lines = []
    if comment:
        lines.extend("# " + c for c in comment.splitlines())
    lines += [f"field {f0.spec.p} {f0.spec.e}", f"vars {f0.n_vars}", f"degree {f0.degree}"]
    lines += [format_form(f) for f in forms]
    Path(path).write_text("\n".join(lines) + "\n")


# --- evaluation and substitution --------------------------------------------------

def evaluate(f: HomogeneousForm, P: ProjPoint) -> FieldElement:
    if P.spec is not f.spec:
        raise FormError(f"point over {P.spec!r}, form over {f.spec!r}")
    if len(P.coords) != f.n_vars:
        raise FormError(f"point has {len(P.coords)} coordinates, form has {f.n_vars} variables")
    return FieldElement(f.spec, evaluate_codes(f, P.coords))


def evaluate_codes(f: HomogeneousForm, coords) -> int:
    spec = f.spec
    acc = 0
    for m, c in f.coeffs.items():
        v = c
        for x, a in zip(coords, m):
            if a:
                v = spec.mul_int(v, spec.pow_int(x, a))
                if not v:
                    break
        acc = spec.add_int(acc, v)
    return acc


def substitute(f: HomogeneousForm, linear) -> dict:
    """``f(x)`` with ``x_i = sum_j linear[i][j] * y_j``; returns a sparse dict in y."""
    spec = f.spec
    n_new = len(linear[0])
    lin_polys = []
    for row in linear:
        poly = {}
        for j, c in enumerate(row):
            if c:
                e = [0] * n_new
                e[j] = 1
                poly[tuple(e)] = int(c)
        lin_polys.append(poly)
    powers: dict = {}
    out: dict = {}
    for m, c in f.coeffs.items():
        term = {(0,) * n_new: c}
        for i, a in enumerate(m):
            if a:
                if (i, a) not in powers:
                    powers[i, a] = _ppow(lin_polys[i], a, n_new, spec)
                term = _pmul(term, powers[i, a], spec)
                if not term:
                    break
        out = _padd(out, term, spec)
    return out


def substitute_batch(spec: FieldSpec, exps, linear: np.ndarray) -> np.ndarray:
    """Images of the monomials ``exps`` under a batch of linear substitutions.

    ``linear`` has shape ``(G, n_old, n_new)``; the result has shape
    ``(G, len(exps), M)`` of codes in the graded-lex basis of degree-d forms in
    ``n_new`` variables (all ``exps`` must share degree d).
    """
    linear = np.asarray(linear, dtype=np.int64)
    G, n_old, n_new = linear.shape
    exps = [tuple(e) for e in exps]
    d = sum(exps[0])
    mt, at = spec.mul_table, spec.add_table
    cache = {(0,) * n_old: np.ones((G, 1), dtype=np.int64)}

    def image(alpha):
        if alpha in cache:
            return cache[alpha]
        i = next(k for k, a in enumerate(alpha) if a)
        beta = alpha[:i] + (alpha[i] - 1,) + alpha[i + 1 :]
        prev = image(beta)
        k = sum(beta)
        src = monomials(n_new, k)
        dst = monomial_index(n_new, k + 1)
        out = np.zeros((G, len(dst)), dtype=np.int64)
        for a, mono in enumerate(src):
            col = prev[:, a]
            for j in range(n_new):
                tgt = dst[mono[:j] + (mono[j] + 1,) + mono[j + 1 :]]
                out[:, tgt] = at[out[:, tgt], mt[col, linear[:, i, j]]]
        cache[alpha] = out
        return out

    result = np.zeros((G, len(exps), len(monomials(n_new, d))), dtype=np.int64)
    for m, alpha in enumerate(exps):
        result[:, m, :] = image(alpha)
    return result


def combine(spec: FieldSpec, coeffs: np.ndarray, images: np.ndarray) -> np.ndarray:
    """``sum_m coeffs[..., m] * images[..., m, :]`` over F_q."""
    mt, at = spec.mul_table, spec.add_table
    acc = np.zeros(images.shape[:-2] + images.shape[-1:], dtype=np.int64)
    for m in range(images.shape[-2]):
        acc = at[acc, mt[np.asarray(coeffs)[..., m, None], images[..., m, :]]]
    return acc


def restrict_to_line(f: HomogeneousForm, line: ProjLine) -> BinaryForm:
    """``f(s P + t Q)`` for the echelon basis rows P, Q of the line."""
    if line.spec is not f.spec or line.n + 1 != f.n_vars:
        raise FormError("line and form live in different spaces")
    P, Q = line.basis
    poly = substitute(f, [[p, q] for p, q in zip(P, Q)])
    d = f.degree
    return BinaryForm(f.spec, tuple(poly.get((d - k, k), 0) for k in range(d + 1)))


def hyperplane_parametrization(H: Hyperplane) -> list[list[int]]:
    """``(n+1) x n`` matrix sending P^(n-1) coordinates onto the points of H.

    The pivot coordinate ``k`` (first nonzero dual entry, equal to 1) is solved
    for; the remaining coordinates are copied in order.
    """
    spec = H.spec
    u = H.dual_coords
    k = next(i for i, c in enumerate(u) if c)
    free = [i for i in range(len(u)) if i != k]
    rows = []
    for i in range(len(u)):
        if i == k:
            rows.append([spec.neg_int(u[j]) for j in free])
        else:
            rows.append([int(j == i) for j in free])
    return rows


def hyperplane_coords(H: Hyperplane, P: ProjPoint) -> ProjPoint:
    """Coordinates in P^(n-1) of a point of H under :func:`hyperplane_parametrization`."""
    if not H.contains(P):
        raise ValueError(f"{P!r} is not on {H!r}")
    k = next(i for i, c in enumerate(H.dual_coords) if c)
    return ProjPoint(P.coords[:k] + P.coords[k + 1 :], P.spec)


def restrict_to_hyperplane(f: HomogeneousForm, H: Hyperplane) -> HomogeneousForm | None:
    """Form in n variables cutting out ``X ∩ H``; ``None`` when H is a component of X."""
    if H.spec is not f.spec or H.n + 1 != f.n_vars:
        raise FormError("hyperplane and form live in different spaces")
    poly = substitute(f, hyperplane_parametrization(H))
    if not poly:
        return None
    return HomogeneousForm(f.spec, f.n_vars - 1, f.degree, poly)


def partial_derivative(f: HomogeneousForm, i: int) -> HomogeneousForm | None:
    """Formal ``d f / d x_i``; ``None`` when it vanishes identically."""
    spec = f.spec
    out = {}
    for m, c in f.coeffs.items():
        a = m[i] % spec.p
        if a:
            e = list(m)
            e[i] -= 1
            out[tuple(e)] = spec.mul_int(c, a)
    if not out:
        return None
    return HomogeneousForm(spec, f.n_vars, f.degree - 1, out)


def gradient(f: HomogeneousForm, coords) -> tuple[int, ...]:
    out = []
    for i in range(f.n_vars):
        g = partial_derivative(f, i)
        out.append(0 if g is None else evaluate_codes(g, coords))
    return tuple(out)


def frobenius_image(f: HomogeneousForm, base_q: int) -> HomogeneousForm:
    spec = f.spec
    coeffs = {m: frobenius(FieldElement(spec, c), base_q).idx for m, c in f.coeffs.items()}
    return HomogeneousForm(spec, f.n_vars, f.degree, coeffs)


def apply_map(f: HomogeneousForm, M: ProjectiveMap) -> HomogeneousForm:
    """``f o M^-1``: vanishes at ``M(P)`` exactly when ``f`` vanishes at ``P``."""
    if M.spec is not f.spec or len(M.matrix) != f.n_vars:
        raise FormError("map and form live in different spaces")
    poly = substitute(f, M.inverse().matrix)
    return HomogeneousForm(f.spec, f.n_vars, f.degree, poly)


def is_perfect_square(f: HomogeneousForm) -> HomogeneousForm | None:
    """Return ``g`` with ``g*g == f`` if there is one over F_q, else ``None``."""
    if f.degree % 2:
        raise FormError("perfect-square test needs even degree")
    spec = f.spec
    half = f.degree // 2
    if spec.p == 2:
        if any(a % 2 for m in f.coeffs for a in m):
            return None
        root = {tuple(a // 2 for a in m): spec.sqrt_int(c) for m, c in f.coeffs.items()}
        g = HomogeneousForm(spec, f.n_vars, half, root)
        return g if g * g == f else None

    order = monomial_index(f.n_vars, f.degree)

    def leading(poly):
        return min(poly, key=order.__getitem__)

    lead_m = leading(f.coeffs)
    if any(a % 2 for a in lead_m):
        return None
    r0 = spec.sqrt_int(f.coeffs[lead_m])
    if r0 is None:
        return None
    lead_g = tuple(a // 2 for a in lead_m)
    root = {lead_g: r0}
    two_lead_inv = spec.inv_int(spec.mul_int(2 % spec.p, r0))
    neg = spec.neg_int(1)
    for _ in range(len(monomials(f.n_vars, half))):
        rest = _padd(f.coeffs, _pscale(_pmul(root, root, spec), neg, spec), spec)
        if not rest:
            break
        m = leading(rest)
        e = tuple(a - b for a, b in zip(m, lead_g))
        if min(e) < 0 or e in root:
            return None
        root[e] = spec.mul_int(rest[m], two_lead_inv)
    g = HomogeneousForm(spec, f.n_vars, half, root)
    return g if g * g == f else None
