"""Finite Blaschke products and their truncated Taylor/Toeplitz realizations."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import InvalidZeroError

DEFAULT_MARGIN = 0.1

_FLOAT = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_COMPLEX_RE = re.compile(
    rf"^(?:(?P<re>{_FLOAT})(?:(?P<sign>[+-])(?P<im>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?i)?"
    rf"|(?P<pure>[+-]|{_FLOAT})?i)$"
)


def parse_complex(text: str) -> complex:
    """Parse ``a``, ``a+bi``, ``a-bi`` or ``bi`` (decimal floats, no locale)."""
    s = text.strip().replace(" ", "")
    m = _COMPLEX_RE.match(s)
    if not s or m is None:
        raise ValueError(f"malformed complex literal {text!r}")
    if m.group("re") is not None:
        re_part = float(m.group("re"))
        if m.group("sign") is None:
            return complex(re_part, 0.0)
        im = float(m.group("im")) if m.group("im") is not None else 1.0
        return complex(re_part, im if m.group("sign") == "+" else -im)
    pure = m.group("pure")
    if pure in (None, "+"):
        return 1j
    if pure == "-":
        return -1j
    return complex(0.0, float(pure))


def format_complex(value: complex) -> str:
    """Inverse of :func:`parse_complex`, using shortest round-trip floats."""
    value = complex(value)
    re_part, im_part = value.real + 0.0, value.imag + 0.0
    if im_part == 0.0:
        return repr(re_part)
    if re_part == 0.0:
        return f"{im_part!r}i"
    sign = "-" if im_part < 0 else "+"
    return f"{re_part!r}{sign}{abs(im_part)!r}i"


def parse_zero_list(text: str) -> list[complex]:
    """Parse a semicolon-separated zero list; the empty string means no zeros."""
    text = text.strip()
    if not text:
        return []
    return [parse_complex(part) for part in text.split(";")]


def _majorant_tail(r, order, scale, n, p):
    """l^p tail from index n of the series ``scale * C(k+order-1, order-1) r^k``.

    Consecutive terms have ratio ``r (k+order)/(k+1)``, which decreases in k,
    so once it drops below one the rest is dominated by a geometric series.
    """
    if order == 0 or r == 0.0:
        return 0.0
    total = 0.0
    k = n
    while True:
        term = scale * math.comb(k + order - 1, order - 1) * r**k
        ratio = r * (k + order) / (k + 1)
        if ratio < 1.0:
            total += term**p / (1.0 - ratio**p)
            break
        total += term**p
        k += 1
    return total ** (1.0 / p)


@dataclass(frozen=True)
class CoeffVector:
    """Taylor coefficients of an element of H^2(D), degrees ``0..truncation``."""

    coeffs: np.ndarray

    @property
    def truncation(self) -> int:
        return len(self.coeffs) - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coeffs, dtype=dtype)

    def __len__(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class BlaschkeProduct:
    """``constant * prod (z - a)/(1 - conj(a) z)`` over ``zeros`` (with repetition).

    Zeros must satisfy ``|a| <= 1 - margin``; the empty product is the
    unimodular constant, whose model space is ``{0}``.
    """

    zeros: tuple = ()
    constant: complex = 1.0
    margin: float = DEFAULT_MARGIN

    def __post_init__(self):
        zeros = tuple(complex(a) for a in self.zeros)
        constant = complex(self.constant)
        for a in zeros:
            if not np.isfinite(a) or abs(a) >= 1.0:
                raise InvalidZeroError(f"zero {format_complex(a)} is not inside the open unit disk")
            if abs(a) > 1.0 - self.margin:
                raise InvalidZeroError(
                    f"zero {format_complex(a)} violates the margin: |a| = {abs(a):.6g} > {1.0 - self.margin:.6g}"
                )
        if not np.isfinite(constant) or abs(abs(constant) - 1.0) > 1e-12:
            raise InvalidZeroError(f"constant {format_complex(constant)} is not unimodular")
        object.__setattr__(self, "zeros", zeros)
        object.__setattr__(self, "constant", constant)

    @classmethod
    def monomial(cls, degree: int, constant: complex = 1.0) -> "BlaschkeProduct":
        return cls((0.0,) * degree, constant)

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def radius(self) -> float:
        """Largest zero modulus; 0 for monomials and constants."""
        return max((abs(a) for a in self.zeros), default=0.0)

    def squared(self) -> "BlaschkeProduct":
        return BlaschkeProduct(self.zeros + self.zeros, self.constant**2, self.margin)

    def __call__(self, z):
        return evaluate(self, z)

    def describe(self) -> dict:
        return {
            "zeros": [format_complex(a) for a in self.zeros],
            "constant": format_complex(self.constant),
        }

    def tail_bound(self, n: int) -> float:
        """Rigorous bound on the H^2 norm of the Taylor tail from degree ``n``.

        Each factor's coefficients are dominated by ``r^(k-1)`` with
        ``r = max|a|``, so the product is dominated by
        ``r^-d C(k+d-1, d-1) r^k``.
        """
        if n <= 0:
            return 1.0
        if self.radius == 0.0:
            return 1.0 if n <= self.degree else 0.0
        r = self.radius
        return min(1.0, _majorant_tail(r, self.degree, r ** (-self.degree), n, 2))

    def sup_tail_bound(self, n: int) -> float:
        """Bound on the l^1 tail from degree ``n``, hence on the sup-norm error of truncation."""
        if self.radius == 0.0:
            return 0.0 if n > self.degree else float(self.degree + 1)
        r = self.radius
        return _majorant_tail(r, self.degree, r ** (-self.degree), n, 1)


def evaluate(B: BlaschkeProduct, z):
    """Evaluate ``B`` at points of the closed disk (array-friendly)."""
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, B.constant, dtype=complex)
    for a in B.zeros:
        out = out * (z - a) / (1.0 - np.conj(a) * z)
    return out if out.ndim else complex(out)


def factor_coefficients(a: complex, length: int) -> np.ndarray:
    """Taylor coefficients of ``(z - a)/(1 - conj(a) z)``: ``-a``, then ``(1-|a|^2) conj(a)^(k-1)``."""
    out = np.empty(length, dtype=complex)
    out[0] = -a
    if length > 1:
        out[1:] = (1.0 - abs(a) ** 2) * np.conj(a) ** np.arange(length - 1)
    return out


@lru_cache(maxsize=256)
def _taylor(B: BlaschkeProduct, length: int) -> np.ndarray:
    coeffs = np.zeros(length, dtype=complex)
    coeffs[0] = B.constant
    for a in B.zeros:
        coeffs = np.convolve(coeffs, factor_coefficients(a, length))[:length]
    coeffs.setflags(write=False)
    return coeffs


def taylor_coefficients(B: BlaschkeProduct, N: int) -> CoeffVector:
    """Maclaurin coefficients of ``B`` through degree ``N``."""
    if N < 0:
        raise ValueError("truncation degree must be nonnegative")
    return CoeffVector(_taylor(B, N + 1))


def multiplication_matrix(B: BlaschkeProduct, N: int) -> np.ndarray:
    """Lower-triangular Toeplitz matrix of ``P_N M_B`` on polynomials of degree <= N."""
    c = _taylor(B, N + 1)
    return scipy.linalg.toeplitz(c, np.zeros(N + 1, dtype=complex))


def numerator_polynomial(B: BlaschkeProduct) -> np.ndarray:
    """Ascending coefficients of ``prod (z - a)``; ``B`` equals this times a zero-free factor."""
    return np.poly(np.array(B.zeros, dtype=complex))[::-1].astype(complex) if B.zeros else np.ones(1, complex)
