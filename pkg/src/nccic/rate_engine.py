"""
Achievable rates and converse bounds for the network-coded cognitive
interference channel under aligned precoded compute-and-forward with DPC.

Internally every channel is held in the normalized form in which the gains
absorb the transmit powers and the inputs have unit power:

    y1 = h11 sqrt(SNR) x1 + h12 sqrt(INR) x2 + z1
    y2 = h21 sqrt(INR) x1 + h22 sqrt(SNR) x2 + z2

The classical model with power constraint SNR on both inputs is the special
case INR = SNR (see :meth:`ChannelInstance.standard`).  Rates are in bits
per complex channel use.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .algebra import (
    FieldElement,
    GaussianInteger,
    check_modulus,
    precoding_coefficient,
    residue_of,
)

# Finite-field size used by the rate engine unless told otherwise.  Only the
# residue-validity of (a1, a2) depends on it; the largest admissible prime
# makes that restriction as mild as possible.
DEFAULT_RATE_MODULUS = 251

# Rates closer than this are treated as ties.
RATE_TIE_TOL = 1e-12


class InvalidScheme(ValueError):
    pass


class DegenerateAlignment(ArithmeticError):
    """The DPC-residual gain h~22 vanishes, so no aligning scale exists."""


def log2_plus(x: float) -> float:
    if not x > 1.0:
        return 0.0
    return math.log2(x)


@dataclass(frozen=True)
class ChannelInstance:
    """Complex 2x2 gains and the SNR/INR operating point."""

    h11: complex
    h12: complex
    h21: complex
    h22: complex
    snr: float
    inr: float

    def __post_init__(self):
        for name in ("h11", "h12", "h21", "h22"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        if not (self.snr > 0 and self.inr > 0):
            raise ValueError(f"snr and inr must be positive, got {self.snr}, {self.inr}")
        if self.h21 == 0:
            raise ValueError("h21 must be nonzero")
        if self.h11 == 0:
            raise ValueError("h11 must be nonzero")

    @classmethod
    def standard(cls, h: Sequence[complex], snr: float) -> "ChannelInstance":
        """Model with power constraint ``snr`` on both inputs (INR = SNR)."""
        h11, h12, h21, h22 = h
        return cls(h11, h12, h21, h22, snr, snr)

    @classmethod
    def from_rho(cls, h: Sequence[complex], snr: float, rho: float) -> "ChannelInstance":
        """GDoF model with ``INR = SNR**rho``."""
        h11, h12, h21, h22 = h
        return cls(h11, h12, h21, h22, snr, snr**rho)

    @property
    def rho(self) -> float:
        if self.snr == 1.0:
            return math.nan
        return math.log(self.inr) / math.log(self.snr)

    @property
    def gains(self) -> tuple[complex, complex, complex, complex]:
        """Effective gains with the powers folded in (unit-power inputs)."""
        s, i = math.sqrt(self.snr), math.sqrt(self.inr)
        return self.h11 * s, self.h12 * i, self.h21 * i, self.h22 * s

    def rotated(self, phase: float) -> "ChannelInstance":
        """Common phase rotation of the gains into receiver 2."""
        u = cmath.exp(1j * phase)
        return ChannelInstance(self.h11, self.h12, self.h21 * u, self.h22 * u, self.snr, self.inr)


@dataclass(frozen=True)
class SchemeChoice:
    """Free parameters of the scheme: integer vector ``a`` and scale ``beta``."""

    a1: GaussianInteger
    a2: GaussianInteger
    beta: complex
    p: int = DEFAULT_RATE_MODULUS
    gamma: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "a1", _gi(self.a1))
        object.__setattr__(self, "a2", _gi(self.a2))
        object.__setattr__(self, "beta", complex(self.beta))
        check_modulus(self.p)

    @property
    def q1(self) -> FieldElement:
        return residue_of(self.a1, self.p)

    @property
    def q2(self) -> FieldElement:
        return residue_of(self.a2, self.p)

    @property
    def b(self) -> FieldElement:
        return precoding_coefficient(self.q1, self.q2)

    def validate(self) -> None:
        if not self.q1 or not self.q2:
            raise InvalidScheme(
                f"a = ({self.a1}, {self.a2}) has a zero residue mod {self.p}"
            )
        if abs(self.beta) > 1.0 + 1e-12:
            raise InvalidScheme(f"|beta| = {abs(self.beta)} exceeds 1")

    def alpha2(self, ch: ChannelInstance) -> complex:
        """Receiver-2 scaling ``a1 / h21`` (effective gain)."""
        return complex(self.a1) / ch.gains[2]

    @property
    def a_norm2(self) -> int:
        return self.a1.norm() + self.a2.norm()

    def sort_key(self) -> tuple:
        return (self.a_norm2, self.a1.re, self.a1.im, self.a2.re, self.a2.im)


def _gi(x) -> GaussianInteger:
    if isinstance(x, GaussianInteger):
        return x
    if isinstance(x, (int, np.integer)):
        return GaussianInteger(int(x), 0)
    return GaussianInteger.from_complex(x)


@dataclass(frozen=True)
class RateResult:
    r1: float
    r2: float
    bounds: tuple[float, float, float]
    gdof: tuple[float, float, float] | None = None

    @property
    def sum(self) -> float:
        return self.r1 + self.r2


@dataclass(frozen=True)
class SearchConfig:
    """Search space of :func:`optimize_scheme`.

    The polar beta grid uses magnitudes ``k/beta_magnitudes`` for
    ``k = 1..beta_magnitudes`` and ``beta_phases`` equally spaced phases.
    ``grid_max_norm`` caps ``|a1|^2`` for the grid part of the search.
    """

    p: int = DEFAULT_RATE_MODULUS
    beta_magnitudes: int = 64
    beta_phases: int = 256
    grid_max_norm: int = 10
    use_grid: bool = True

    def beta_grid(self) -> np.ndarray:
        mags = np.arange(1, self.beta_magnitudes + 1) / self.beta_magnitudes
        phases = 2 * np.pi * np.arange(self.beta_phases) / self.beta_phases
        return (mags[:, None] * np.exp(1j * phases)[None, :]).ravel()


# ---------------------------------------------------------------------------
# Elementary rate expressions
# ---------------------------------------------------------------------------


def computation_rate(h, alpha: complex, a, snr: float) -> float:
    """Compute-and-forward rate ``log2+(snr / (|alpha|^2 + |alpha h - a|^2 snr))``."""
    h = np.asarray(h, dtype=complex)
    a = np.asarray([complex(x) for x in a], dtype=complex)
    resid = np.sum(np.abs(alpha * h - a) ** 2)
    den = abs(alpha) ** 2 + resid * snr
    if den == 0:
        return math.inf
    return log2_plus(snr / den)


def alpha_mmse(h11: complex, snr: float) -> float:
    s = snr * abs(h11) ** 2
    return s / (1.0 + s)


def dpc_residual_gain(ch: ChannelInstance) -> complex:
    """``h~22 = g22 - alpha_MMSE g12 g21 / g11`` with effective gains g."""
    g11, g12, g21, g22 = ch.gains
    return g22 - alpha_mmse(ch.h11, ch.snr) * g12 * g21 / g11


def effective_channel(ch: ChannelInstance, beta: complex) -> tuple[complex, complex]:
    """Effective receiver-2 channel ``(g21, beta h~22)`` seen by the CoF mapping."""
    if abs(beta) > 1.0 + 1e-12:
        raise InvalidScheme(f"|beta| = {abs(beta)} exceeds 1")
    return ch.gains[2], complex(beta) * dpc_residual_gain(ch)


def aligned_beta(ch: ChannelInstance, p: int | None = None) -> tuple[complex, int]:
    """Scale ``beta* = g21 / (h~22 gamma)`` with ``gamma = ceil(|g21 / h~22|)``.

    With ``a = (gamma, 1)`` the receiver-2 residual ``alpha2 h~(beta*) - a``
    vanishes.  If ``p`` is given and ``gamma`` is a multiple of ``p`` (zero
    residue), the next integer is used instead; alignment is preserved
    because any integer ``gamma >= |g21 / h~22|`` keeps ``|beta*| <= 1``.

    Raises
    ------
    DegenerateAlignment
        If ``h~22 == 0``.
    """
    t22 = dpc_residual_gain(ch)
    if t22 == 0:
        raise DegenerateAlignment("h~22 vanishes; no aligning beta exists")
    ratio = ch.gains[2] / t22
    gamma = max(1, math.ceil(abs(ratio)))
    if p is not None:
        check_modulus(p)
        while gamma % p == 0:
            gamma += 1
    return ratio / gamma, gamma


def aligned_choice(ch: ChannelInstance, p: int = DEFAULT_RATE_MODULUS) -> SchemeChoice:
    beta, gamma = aligned_beta(ch, p)
    return SchemeChoice(GaussianInteger(gamma), GaussianInteger(1), beta, p, gamma)


def aligned_rate_closed_form(ch: ChannelInstance, gamma: int) -> float:
    """Receiver-2 rate at the aligned choice: ``log2(|h21|^2 INR) - 2 log2 gamma``.

    Equals ``rho log2(|h21|^2 SNR) - 2 log2 gamma`` for unit-magnitude h21.
    Not clamped at zero.
    """
    return math.log2(abs(ch.h21) ** 2 * ch.inr) - 2.0 * math.log2(gamma)


def gamma_upper_bound(ch: ChannelInstance) -> float:
    """``1 + |h21 / (h22 SNR^((1-rho)/2) - h SNR^((rho-1)/2))|`` with
    ``h = alpha_MMSE h12 h21 / h11``, written in the SNR-exponent form."""
    rho = ch.rho
    h = alpha_mmse(ch.h11, ch.snr) * ch.h12 * ch.h21 / ch.h11
    den = ch.h22 * ch.snr ** ((1 - rho) / 2) - h * ch.snr ** ((rho - 1) / 2)
    return 1.0 + abs(ch.h21 / den)


def converse_bounds(ch: ChannelInstance) -> tuple[float, float, float]:
    """Upper bounds ``(R_sym, max(R1, R2), 2 R_sym + R~)``.

    Each receiver's individual bound uses its own received powers, i.e.
    ``log2(1 + |g_l1|^2 + |g_l2|^2)`` with effective gains g.
    """
    g11, g12, g21, g22 = ch.gains
    r_sym = min(math.log2(1 + abs(g11) ** 2), math.log2(1 + abs(g21) ** 2))
    r_max = max(
        math.log2(1 + abs(g11) ** 2 + abs(g12) ** 2),
        math.log2(1 + abs(g21) ** 2 + abs(g22) ** 2),
    )
    return r_sym, r_max, r_sym + r_max


def _gdof(ch: ChannelInstance, r1: float, r2: float) -> tuple[float, float, float] | None:
    if ch.snr <= 1.0:
        return None
    ls = math.log2(ch.snr)
    return r1 / ls, r2 / ls, (r1 + r2) / ls


def theorem1_rates(ch: ChannelInstance, choice: SchemeChoice) -> RateResult:
    """Rate pair achieved by DPC at transmitter 1 and aligned PCoF at receiver 2.

    Raises
    ------
    InvalidScheme
        If a residue of ``a`` is zero mod p or ``|beta| > 1``.
    """
    choice.validate()
    g11 = ch.gains[0]
    r1 = math.log2(1 + abs(g11) ** 2)
    h_eff = effective_channel(ch, choice.beta)
    r2 = computation_rate(h_eff, choice.alpha2(ch), (choice.a1, choice.a2), 1.0)
    return RateResult(r1, r2, converse_bounds(ch), _gdof(ch, r1, r2))


# ---------------------------------------------------------------------------
# Optimization over (a, beta)
# ---------------------------------------------------------------------------
#
# With alpha2 = a1/g21 pinned, the receiver-2 denominator (unit power) is
#
#     D(a, beta) = |a1|^2 / |g21|^2 + |a1 beta c - a2|^2,   c = h~22 / g21.
#
# Since |beta| <= 1 the point a1 beta c ranges over the disk of radius
# |a1||c|, and a2 is a nonzero Gaussian integer, so
#
#     D >= L(|a1|) = |a1|^2 / |g21|^2 + max(0, 1 - |a1||c|)^2,
#
# with equality at a2 = 1 and beta = a2 / (a1 c) projected onto the unit
# circle.  L is convex in t = |a1| with unconstrained minimizer
# t0 = |c| G / (1 + |c|^2 G), G = |g21|^2, so the exact optimum over all
# (a, beta) is attained at one of the two admissible norms bracketing t0^2.
# The same bound shows that no a with |a1|^2 > 1 + |h~|^2 can give a
# positive rate, which is the radius quoted for the search.


def _canonical_reps(norm: int, p: int) -> list[GaussianInteger]:
    """Gaussian integers of exact ``norm`` in the quadrant re > 0, im >= 0
    (one per unit orbit) with nonzero residue mod p."""
    out = []
    x = 1
    while x * x <= norm:
        y2 = norm - x * x
        y = math.isqrt(y2)
        if y * y == y2:
            z = GaussianInteger(x, y)
            if residue_of(z, p):
                out.append(z)
        x += 1
    return out


def _admissible_norm(start: int, step: int, p: int, stop: int | None = None) -> int | None:
    n = start
    while n >= 1 and (stop is None or n <= stop):
        if _canonical_reps(n, p):
            return n
        n += step
    return None


def _aligned_candidate(ch: ChannelInstance, a1: GaussianInteger, c: complex, p: int) -> SchemeChoice:
    # best beta for a2 = 1: land a1 beta c as close to 1 as the unit disk allows
    target = 1.0 / (complex(a1) * c)
    if abs(target) > 1.0:
        target /= abs(target)
    return SchemeChoice(a1, GaussianInteger(1), target, p)


def _better(rate: float, choice: SchemeChoice, best_rate: float, best: SchemeChoice | None) -> bool:
    if best is None or rate > best_rate + RATE_TIE_TOL:
        return True
    if rate >= best_rate - RATE_TIE_TOL:
        return choice.sort_key() < best.sort_key()
    return False


def _grid_search(ch: ChannelInstance, c: complex, search: SearchConfig, incumbent: float):
    """Best (rate, choice) over the polar beta grid and small |a1|.

    Values of a1 whose lower bound L(|a1|) cannot reach ``incumbent`` are
    skipped; this never changes the maximum.
    """
    p = search.p
    G = abs(ch.gains[2]) ** 2
    betas = search.beta_grid()
    radius = min(search.grid_max_norm, int(1 + G * (1 + abs(c) ** 2)))
    a1s = []
    for norm in range(1, radius + 1):
        lower = norm / G + max(0.0, 1.0 - math.sqrt(norm) * abs(c)) ** 2
        if log2_plus(1.0 / (lower * (1 - 1e-9))) < incumbent - RATE_TIE_TOL:
            continue
        a1s.extend(_canonical_reps(norm, p))
    if not a1s:
        return -1.0, None
    a1v = np.array([complex(z) for z in a1s])
    target = a1v[:, None] * betas[None, :] * c
    a2 = np.floor(target.real + 0.5) + 1j * np.floor(target.imag + 0.5)
    resid = np.abs(target - a2) ** 2
    # a2 must have a nonzero residue; fall back to the best unit step away
    bad = (np.mod(a2.real, p) == 0) & (np.mod(a2.imag, p) == 0)
    if bad.any():
        tb, ab = target[bad], a2[bad]
        steps = np.array([1, -1, 1j, -1j])
        alt = ab[:, None] + steps[None, :]
        d = np.abs(tb[:, None] - alt) ** 2
        d[(np.mod(alt.real, p) == 0) & (np.mod(alt.imag, p) == 0)] = np.inf
        k = np.argmin(d, axis=1)
        a2[bad] = alt[np.arange(k.size), k]
        resid[bad] = d[np.arange(k.size), k]
    den = (np.abs(a1v) ** 2 / G)[:, None] + resid
    best_rate, best = -1.0, None
    for i in range(len(a1s)):
        j = int(np.argmin(den[i]))
        rate = log2_plus(1.0 / den[i, j])
        z = a2[i, j]
        choice = SchemeChoice(a1s[i], GaussianInteger(int(z.real), int(z.imag)), betas[j], p)
        if _better(rate, choice, best_rate, best):
            best_rate, best = rate, choice
    return best_rate, best


def optimize_scheme(
    ch: ChannelInstance, search: SearchConfig | None = None
) -> tuple[SchemeChoice, RateResult]:
    """Maximize the receiver-2 rate over ``a`` and ``beta`` (R1 is unaffected).

    Candidates are the aligned choice ``(beta*, a = (gamma, 1))``, the exact
    per-norm optimum bracketing the continuous minimizer (see the comment
    block above), and the polar ``beta`` grid for small ``|a1|``.  Ties are
    broken by smallest ``|a|^2`` then lexicographically.
    """
    search = search or SearchConfig()
    p = search.p
    G = abs(ch.gains[2]) ** 2
    t22 = dpc_residual_gain(ch)

    candidates: list[SchemeChoice] = []
    if t22 != 0:
        candidates.append(aligned_choice(ch, p))
        c = t22 / ch.gains[2]
        t0_sq = (abs(c) * G / (1 + abs(c) ** 2 * G)) ** 2
        lo = _admissible_norm(math.floor(t0_sq), -1, p)
        hi = _admissible_norm(max(1, math.ceil(t0_sq)), +1, p)
        for norm in {n for n in (lo, hi) if n is not None}:
            for a1 in _canonical_reps(norm, p):
                candidates.append(_aligned_candidate(ch, a1, c, p))
    else:
        # every candidate keeps a residual of at least |a2| >= 1
        c = 0j
        candidates.append(SchemeChoice(GaussianInteger(1), GaussianInteger(1), 0j, p))

    best_rate, best = -1.0, None
    for choice in candidates:
        rate = theorem1_rates(ch, choice).r2
        if _better(rate, choice, best_rate, best):
            best_rate, best = rate, choice

    if search.use_grid:
        g_rate, g_choice = _grid_search(ch, c, search, best_rate)
        if g_choice is not None:
            g_rate = theorem1_rates(ch, g_choice).r2
            if _better(g_rate, g_choice, best_rate, best):
                best_rate, best = g_rate, g_choice

    if best is None:
        raise AssertionError("optimize_scheme produced no candidate")
    return best, theorem1_rates(ch, best)


# ---------------------------------------------------------------------------
# GDoF
# ---------------------------------------------------------------------------


def gdof_estimate(
    h: Sequence[complex],
    rho: float,
    snr_grid: Iterable[float],
    search: SearchConfig | None = None,
) -> list[tuple[float, float, float, float]]:
    """Finite-SNR GDoF estimates ``(snr, d1, d2, d_sum)`` along ``snr_grid``.

    Rates come from :func:`optimize_scheme` and are normalized by log2(SNR).
    """
    snr_grid = [float(s) for s in snr_grid]
    if len(snr_grid) < 2 or any(b <= a for a, b in zip(snr_grid, snr_grid[1:])):
        raise ValueError("snr_grid must be increasing with at least two points")
    if snr_grid[0] <= 1.0:
        raise ValueError("GDoF normalization needs SNR > 1")
    out = []
    for snr in snr_grid:
        ch = ChannelInstance.from_rho(h, snr, rho)
        _, res = optimize_scheme(ch, search)
        d1, d2, ds = res.gdof
        out.append((snr, d1, d2, ds))
    return out


def random_unit_channel(rng: np.random.Generator) -> tuple[complex, complex, complex, complex]:
    """Unit-magnitude gains with i.i.d. uniform phases."""
    ph = rng.uniform(0.0, 2 * np.pi, size=4)
    return tuple(complex(z) for z in np.exp(1j * ph))
