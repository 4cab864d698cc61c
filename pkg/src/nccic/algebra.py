"""
Exact arithmetic over the Gaussian integers Z[j] and the field F_q, q = p^2.

Elements of F_q are represented as residues of Z[j] modulo p, i.e. pairs
``(re, im)`` with both components in ``[0, p)``.  This quotient ring is a
field exactly when ``p`` is a prime with ``p % 4 == 3``; other moduli are
rejected at construction time.

Vectors of field symbols (messages) are stored as complex numpy arrays whose
real and imaginary parts are canonical integers.  Products of such values are
exact in double precision for every admissible modulus (p <= 251).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MAX_MODULUS = 251


class InvalidModulus(ValueError):
    """Modulus is not a prime congruent to 3 mod 4 (or is out of range)."""


class ModulusMismatch(ValueError):
    pass


class InversionOfZero(ZeroDivisionError):
    pass


class InvalidCoefficient(ValueError):
    pass


@lru_cache(maxsize=None)
def check_modulus(p: int) -> int:
    """Validate ``p`` and return it.

    Raises
    ------
    InvalidModulus
        If ``p`` is not a prime with ``p % 4 == 3`` and ``p <= MAX_MODULUS``.
    """
    p = int(p)
    if p < 3 or p > MAX_MODULUS:
        raise InvalidModulus(f"modulus must lie in [3, {MAX_MODULUS}], got {p}")
    if p % 4 != 3:
        raise InvalidModulus(f"Z[j]/pZ[j] is a field only for p = 3 mod 4, got p={p}")
    for d in range(2, int(p**0.5) + 1):
        if p % d == 0:
            raise InvalidModulus(f"{p} is not prime")
    return p


@dataclass(frozen=True)
class GaussianInteger:
    re: int
    im: int = 0

    def __post_init__(self):
        object.__setattr__(self, "re", int(self.re))
        object.__setattr__(self, "im", int(self.im))

    @classmethod
    def from_complex(cls, z: complex) -> "GaussianInteger":
        z = complex(z)
        if z.real != round(z.real) or z.imag != round(z.imag):
            raise ValueError(f"{z} is not a Gaussian integer")
        return cls(round(z.real), round(z.imag))

    def __add__(self, other: "GaussianInteger") -> "GaussianInteger":
        other = _as_gaussian(other)
        return GaussianInteger(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other: "GaussianInteger") -> "GaussianInteger":
        other = _as_gaussian(other)
        return GaussianInteger(self.re - other.re, self.im - other.im)

    def __rsub__(self, other: "GaussianInteger") -> "GaussianInteger":
        return _as_gaussian(other) - self

    def __neg__(self) -> "GaussianInteger":
        return GaussianInteger(-self.re, -self.im)

    def __mul__(self, other: "GaussianInteger") -> "GaussianInteger":
        other = _as_gaussian(other)
        return GaussianInteger(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "GaussianInteger":
        return GaussianInteger(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __bool__(self) -> bool:
        return bool(self.re or self.im)

    def __repr__(self) -> str:
        return f"GaussianInteger({self.re}{self.im:+d}j)"


def _as_gaussian(x) -> GaussianInteger:
    if isinstance(x, GaussianInteger):
        return x
    if isinstance(x, (int, np.integer)):
        return GaussianInteger(int(x), 0)
    if isinstance(x, (complex, float, np.complexfloating, np.floating)):
        return GaussianInteger.from_complex(x)
    return NotImplemented


@dataclass(frozen=True)
class FieldElement:
    """An element of F_{p^2} stored as the canonical residue ``re + j*im``."""

    re: int
    im: int
    p: int

    def __post_init__(self):
        p = check_modulus(self.p)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "re", int(self.re) % p)
        object.__setattr__(self, "im", int(self.im) % p)

    @classmethod
    def zero(cls, p: int) -> "FieldElement":
        return cls(0, 0, p)

    @classmethod
    def one(cls, p: int) -> "FieldElement":
        return cls(1, 0, p)

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement):
            raise TypeError(f"expected FieldElement, got {type(other).__name__}")
        if other.p != self.p:
            raise ModulusMismatch(f"moduli differ: {self.p} vs {other.p}")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.re + other.re, self.im + other.im, self.p)

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(self.re - other.re, self.im - other.im, self.p)

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.re, -self.im, self.p)

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        return FieldElement(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
            self.p,
        )

    def inverse(self) -> "FieldElement":
        # (a + jb)^-1 = (a - jb) / (a^2 + b^2); the norm is a unit mod p
        # because -1 is a non-residue when p = 3 mod 4.
        if not self:
            raise InversionOfZero(f"zero has no inverse in F_{self.p}^2")
        n_inv = pow(self.re * self.re + self.im * self.im, -1, self.p)
        return FieldElement(self.re * n_inv, -self.im * n_inv, self.p)

    def __bool__(self) -> bool:
        return bool(self.re or self.im)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)

    def __repr__(self) -> str:
        return f"FieldElement(({self.re},{self.im}) mod {self.p})"


def field_add(x: FieldElement, y: FieldElement) -> FieldElement:
    return x + y


def field_mul(x: FieldElement, y: FieldElement) -> FieldElement:
    return x * y


def field_inv(x: FieldElement) -> FieldElement:
    return x.inverse()


def g_map(x: FieldElement) -> complex:
    """Natural embedding of F_q into {a + jb : a, b in Z_p} in C."""
    return complex(x.re, x.im)


def g_inverse(z, p: int) -> FieldElement:
    """Reduce a Gaussian integer (or integral complex) mod p into F_q."""
    z = _as_gaussian(z)
    return FieldElement(z.re, z.im, p)


def residue_of(a: GaussianInteger, p: int) -> FieldElement:
    return g_inverse(a, p)


def precoding_coefficient(q1: FieldElement, q2: FieldElement) -> FieldElement:
    """Return ``b`` with ``q1*b + q2 = 0``, i.e. ``b = -q2 / q1``.

    Raises
    ------
    InvalidCoefficient
        If ``q1`` is zero.
    """
    q1._check(q2)
    if not q1:
        raise InvalidCoefficient("q1 must be nonzero to solve q1*b + q2 = 0")
    return q1.inverse() * (-q2)


def all_elements(p: int) -> list[FieldElement]:
    check_modulus(p)
    return [FieldElement(a, b, p) for a in range(p) for b in range(p)]


# ---------------------------------------------------------------------------
# Array-level helpers.  Arrays hold Gaussian integers as complex128 with
# integral parts; all results are returned in canonical residue form.
# ---------------------------------------------------------------------------


def reduce_mod(z, p: int) -> np.ndarray:
    """Componentwise canonical reduction of integral complex values mod p."""
    z = np.asarray(z, dtype=complex)
    return np.mod(np.rint(z.real), p) + 1j * np.mod(np.rint(z.imag), p)


def array_mul(x, y, p: int) -> np.ndarray:
    return reduce_mod(np.asarray(x, dtype=complex) * np.asarray(y, dtype=complex), p)


def array_add(x, y, p: int) -> np.ndarray:
    return reduce_mod(np.asarray(x, dtype=complex) + np.asarray(y, dtype=complex), p)


def array_matmul(w, G, p: int) -> np.ndarray:
    """Vector-matrix product over F_q; ``w`` has shape (..., r), ``G`` (r, n)."""
    return reduce_mod(np.asarray(w, dtype=complex) @ np.asarray(G, dtype=complex), p)


def random_symbols(rng: np.random.Generator, p: int, shape) -> np.ndarray:
    check_modulus(p)
    re = rng.integers(0, p, size=shape)
    im = rng.integers(0, p, size=shape)
    return re + 1j * im


class MessageVector:
    """A length-r vector over F_q.

    Parameters
    ----------
    symbols : sequence of FieldElement, or complex array
        Message symbols.  Arrays are reduced into canonical form.
    p : int, optional
        Modulus; required when ``symbols`` is an array.
    """

    __slots__ = ("symbols", "p")

    def __init__(self, symbols, p: int | None = None):
        from_elements = (
            not isinstance(symbols, np.ndarray)
            and len(symbols) > 0
            and all(isinstance(s, FieldElement) for s in symbols)
        )
        if not from_elements:
            if p is None:
                raise ValueError("p is required when symbols are not FieldElements")
            p = check_modulus(p)
            arr = reduce_mod(np.asarray(symbols, dtype=complex).reshape(-1), p)
        else:
            moduli = {s.p for s in symbols}
            if len(moduli) != 1 or (p is not None and moduli != {p}):
                raise ModulusMismatch(f"symbols carry moduli {sorted(moduli)}")
            p = moduli.pop()
            arr = np.array([complex(s.re, s.im) for s in symbols], dtype=complex)
        arr.setflags(write=False)
        self.symbols = arr
        self.p = p

    @classmethod
    def zeros(cls, r: int, p: int) -> "MessageVector":
        return cls(np.zeros(r, dtype=complex), p)

    @classmethod
    def random(cls, r: int, p: int, rng: np.random.Generator) -> "MessageVector":
        return cls(random_symbols(rng, p, r), p)

    def __len__(self) -> int:
        return self.symbols.shape[0]

    def __getitem__(self, i: int) -> FieldElement:
        s = self.symbols[i]
        return FieldElement(int(s.real), int(s.imag), self.p)

    @property
    def elements(self) -> list[FieldElement]:
        return [self[i] for i in range(len(self))]

    def _check(self, other: "MessageVector") -> None:
        if other.p != self.p:
            raise ModulusMismatch(f"moduli differ: {self.p} vs {other.p}")
        if len(other) != len(self):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")

    def __add__(self, other: "MessageVector") -> "MessageVector":
        self._check(other)
        return MessageVector(self.symbols + other.symbols, self.p)

    def __neg__(self) -> "MessageVector":
        return MessageVector(-self.symbols, self.p)

    def scale(self, c: FieldElement) -> "MessageVector":
        if c.p != self.p:
            raise ModulusMismatch(f"moduli differ: {self.p} vs {c.p}")
        return MessageVector(self.symbols * complex(c), self.p)

    def zero_pad(self, length: int) -> "MessageVector":
        if length < len(self):
            raise ValueError(f"cannot pad length {len(self)} down to {length}")
        out = np.zeros(length, dtype=complex)
        out[: len(self)] = self.symbols
        return MessageVector(out, self.p)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MessageVector):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.symbols, other.symbols)

    def __hash__(self):
        return hash((self.p, self.symbols.tobytes()))

    def __repr__(self) -> str:
        body = ", ".join(f"({int(s.real)},{int(s.imag)})" for s in self.symbols)
        return f"MessageVector([{body}] mod {self.p})"


def pad_to_common_length(
    w1: MessageVector, w2: MessageVector
) -> tuple[MessageVector, MessageVector]:
    """Zero-pad the shorter message so both have the same length."""
    r = max(len(w1), len(w2))
    return w1.zero_pad(r), w2.zero_pad(r)


def gaussian_integers_by_norm(max_norm: int) -> list[GaussianInteger]:
    """All nonzero Gaussian integers with norm <= max_norm, sorted by
    (norm, re, im)."""
    k = int(max_norm**0.5)
    out = [
        GaussianInteger(x, y)
        for x in range(-k, k + 1)
        for y in range(-k, k + 1)
        if 0 < x * x + y * y <= max_norm
    ]
    out.sort(key=lambda z: (z.norm(), z.re, z.im))
    return out


def as_elements(values: Iterable, p: int) -> Sequence[FieldElement]:
    return [g_inverse(v, p) for v in values]
