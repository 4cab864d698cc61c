"""
Nested lattice codes from Construction A over F_{p^2}.

The coarse (shaping) lattice is the scaled hypercube ``tau * Z[j]^n`` and the
fine lattice is ``Lambda_1 = (tau/p) g(C) + Lambda`` for a linear code ``C``
over F_q with generator ``G``.  Lattice points are plain complex numpy arrays
of shape ``(..., n)``; every operation broadcasts over leading axes so that
Monte-Carlo batches are processed in one call.

The fundamental cell is half-open, ``[-tau/2, tau/2)`` on each real axis,
which fixes quantizer ties.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .algebra import (
    FieldElement,
    MessageVector,
    array_matmul,
    check_modulus,
    reduce_mod,
)

# Largest number of fine-lattice cosets enumerated by the exact decoder.
MAX_COSETS = 6561


class NotACodeword(ValueError):
    pass


def _round_half_up(x: np.ndarray) -> np.ndarray:
    return np.floor(x + 0.5)


class NestedLatticeCode:
    """Construction-A nested lattice pair with hypercube shaping.

    Parameters
    ----------
    p : int
        Field characteristic, prime with ``p % 4 == 3``.
    n : int
        Block length in complex dimensions.
    tau : float
        Side of the coarse Voronoi cell; second moment is ``tau**2 / 6``.
    G : array_like, optional
        ``r x n`` generator over F_q (integral complex entries).  Defaults to
        the ``n x n`` identity, for which ``Lambda_1 = p^-1 Lambda``.  A
        non-identity generator must be systematic, ``[I_r | P]``.
    """

    def __init__(self, p: int, n: int, tau: float, G=None):
        self.p = check_modulus(p)
        if n < 1:
            raise ValueError(f"block length must be positive, got {n}")
        if not tau > 0:
            raise ValueError(f"tau must be positive, got {tau}")
        self.n = int(n)
        self.tau = float(tau)
        if G is None:
            G = np.eye(self.n, dtype=complex)
        G = reduce_mod(np.atleast_2d(np.asarray(G, dtype=complex)), self.p)
        r, ncols = G.shape
        if ncols != self.n or r > self.n:
            raise ValueError(f"generator must be r x n with r <= n, got {G.shape}")
        if r and not np.array_equal(G[:, :r], np.eye(r)):
            raise ValueError("generator must be in systematic form [I_r | P]")
        G.setflags(write=False)
        self.G = G
        self.r = r
        self.identity = r == self.n
        if not self.identity and self.p ** (2 * r) > MAX_COSETS:
            raise ValueError(
                f"p^(2r) = {self.p ** (2 * r)} cosets exceeds the exact decoder "
                f"limit {MAX_COSETS}"
            )
        self._coset_table = None

    @classmethod
    def for_snr(cls, p: int, n: int, snr: float, G=None) -> "NestedLatticeCode":
        """Code whose coarse lattice has second moment ``snr``."""
        return cls(p, n, math.sqrt(6.0 * snr), G)

    @classmethod
    def random_systematic(
        cls, p: int, n: int, r: int, tau: float, rng: np.random.Generator
    ) -> "NestedLatticeCode":
        P = rng.integers(0, p, size=(r, n - r)) + 1j * rng.integers(0, p, size=(r, n - r))
        G = np.hstack([np.eye(r, dtype=complex), P])
        return cls(p, n, tau, G)

    @property
    def second_moment(self) -> float:
        return self.tau**2 / 6.0

    @property
    def rate(self) -> float:
        """Bits per complex dimension, ``(r/n) log2 q``."""
        return self.r / self.n * 2.0 * math.log2(self.p)

    def __repr__(self) -> str:
        return f"NestedLatticeCode(p={self.p}, n={self.n}, r={self.r}, tau={self.tau:g})"

    # -- coarse lattice --------------------------------------------------

    def quantize_coarse(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        t = self.tau
        return t * (_round_half_up(x.real / t) + 1j * _round_half_up(x.imag / t))

    def mod_lambda(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return x - self.quantize_coarse(x)

    # -- fine lattice ----------------------------------------------------

    def _codeword_offsets(self) -> np.ndarray:
        """All (tau/p) g(wG), shape (p^(2r), n), in message enumeration order."""
        if self._coset_table is None:
            p = self.p
            symbols = [complex(a, b) for a in range(p) for b in range(p)]
            msgs = np.array(list(itertools.product(symbols, repeat=self.r)), dtype=complex)
            msgs = msgs.reshape(-1, self.r)
            self._coset_table = (self.tau / p) * array_matmul(msgs, self.G, p)
        return self._coset_table

    def quantize_fine(self, x) -> np.ndarray:
        """Nearest point of ``Lambda_1``.

        With the identity generator this is componentwise rounding on the
        grid ``(tau/p) Z[j]``; otherwise every coset of ``Lambda`` in
        ``Lambda_1`` is searched exactly.
        """
        x = np.asarray(x, dtype=complex)
        if self.identity:
            s = self.tau / self.p
            return s * (_round_half_up(x.real / s) + 1j * _round_half_up(x.imag / s))
        offsets = self._codeword_offsets()
        flat = x.reshape(-1, self.n)
        out = np.empty_like(flat)
        chunk = max(1, 2**20 // (offsets.shape[0] * self.n))
        for start in range(0, flat.shape[0], chunk):
            blk = flat[start : start + chunk, None, :] - offsets[None]
            cand = self.quantize_coarse(blk) + offsets[None]
            d = np.sum(np.abs(flat[start : start + chunk, None, :] - cand) ** 2, axis=-1)
            best = np.argmin(d, axis=1)
            out[start : start + chunk] = cand[np.arange(best.size), best]
        return out.reshape(x.shape)

    def quantize(self, x, lattice: str = "coarse") -> np.ndarray:
        if lattice == "coarse":
            return self.quantize_coarse(x)
        if lattice == "fine":
            return self.quantize_fine(x)
        raise ValueError(f"lattice must be 'coarse' or 'fine', got {lattice!r}")

    # -- labeling --------------------------------------------------------

    def _message_array(self, w) -> np.ndarray:
        if isinstance(w, MessageVector):
            if w.p != self.p:
                raise ValueError(f"message modulus {w.p} != code modulus {self.p}")
            w = w.symbols
        w = np.asarray(w, dtype=complex)
        if w.shape[-1] != self.r:
            raise ValueError(f"message length {w.shape[-1]} != code dimension {self.r}")
        return w

    def encode(self, w) -> np.ndarray:
        """Natural labeling ``f(w) = [(tau/p) g(wG)] mod Lambda``."""
        w = self._message_array(w)
        c = array_matmul(w, self.G, self.p)
        return self.mod_lambda((self.tau / self.p) * c)

    def decode(self, v, atol: float = 1e-6) -> np.ndarray:
        """Inverse labeling; returns message symbols of shape (..., r).

        Raises
        ------
        NotACodeword
            If ``v`` is not (within ``atol`` relative to the fine spacing) a
            point of ``Lambda_1``.
        """
        v = np.asarray(v, dtype=complex)
        y = v * (self.p / self.tau)
        yi = np.rint(y.real) + 1j * np.rint(y.imag)
        if np.any(np.abs(y - yi) > atol):
            raise NotACodeword("point is not on the fine lattice")
        c = reduce_mod(yi, self.p)
        w = c[..., : self.r]
        if not self.identity and not np.array_equal(array_matmul(w, self.G, self.p), c):
            raise NotACodeword("point does not lie in a coset of the code")
        return w

    def sample_dither(self, rng, size=()) -> np.ndarray:
        """Uniform samples over the fundamental cell, shape ``size + (n,)``.

        ``rng`` is a ``numpy.random.Generator`` or an integer seed.
        """
        rng = np.random.default_rng(rng)
        if isinstance(size, (int, np.integer)):
            size = (int(size),)
        shape = tuple(size) + (self.n,)
        h = self.tau / 2
        return rng.uniform(-h, h, size=shape) + 1j * rng.uniform(-h, h, size=shape)

    def scale_label(self, c: FieldElement, t) -> np.ndarray:
        """``[g(c) t] mod Lambda``, equal to ``f(c w)`` when ``t = f(w)``."""
        return self.mod_lambda(complex(c.re, c.im) * np.asarray(t, dtype=complex))


def quantize(x, code: NestedLatticeCode, lattice: str = "coarse") -> np.ndarray:
    return code.quantize(x, lattice)


def mod_lambda(x, code: NestedLatticeCode) -> np.ndarray:
    return code.mod_lambda(x)


def encode_label(w, code: NestedLatticeCode) -> np.ndarray:
    return code.encode(w)


def decode_label(v, code: NestedLatticeCode) -> MessageVector:
    w = code.decode(v)
    if w.ndim != 1:
        raise ValueError("decode_label takes a single point; use code.decode for batches")
    return MessageVector(w, code.p)


def sample_dither(code: NestedLatticeCode, rng_seed) -> np.ndarray:
    return code.sample_dither(rng_seed)


def scale_label(c: FieldElement, t, code: NestedLatticeCode) -> np.ndarray:
    return code.scale_label(c, t)
