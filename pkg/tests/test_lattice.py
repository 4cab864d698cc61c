import itertools

import numpy as np
import pytest
from scipy import stats

from nccic.algebra import FieldElement, GaussianInteger, MessageVector, array_matmul, reduce_mod
from nccic.lattice import (
    NestedLatticeCode,
    NotACodeword,
    decode_label,
    encode_label,
    mod_lambda,
    quantize,
    sample_dither,
    scale_label,
)

F9 = [complex(a, b) for a in range(3) for b in range(3)]


@pytest.fixture
def code3():
    return NestedLatticeCode(3, 1, 3.0)


def test_quantize_examples(code3):
    unit = NestedLatticeCode(3, 1, 1.0)
    assert quantize([0.4 + 0.4j], unit)[0] == 0
    assert quantize([0.6 - 0.2j], unit)[0] == 1
    assert quantize([1.1 + 0.1j], code3, "fine")[0] == 1
    with pytest.raises(ValueError):
        quantize([0j], code3, "medium")


def test_mod_lambda_examples():
    assert mod_lambda([0.75], NestedLatticeCode(3, 1, 1.0))[0] == -0.25
    assert mod_lambda([1.0 + 1.0j], NestedLatticeCode(3, 1, 2.0))[0] == -1.0 - 1.0j
    code = NestedLatticeCode(7, 2, 2.5)
    lam = 2.5 * np.array([3 - 2j, -1 + 4j])
    assert np.all(mod_lambda(lam, code) == 0)


def test_mod_lambda_lands_in_cell():
    code = NestedLatticeCode(3, 3, 1.7)
    rng = np.random.default_rng(0)
    x = 10 * (rng.standard_normal((1000, 3)) + 1j * rng.standard_normal((1000, 3)))
    m = code.mod_lambda(x)
    h = code.tau / 2
    assert np.all((-h <= m.real) & (m.real < h) & (-h <= m.imag) & (m.imag < h))
    k = (x - m) / code.tau
    assert np.allclose(k, np.round(k.real) + 1j * np.round(k.imag))


def test_encode_examples(code3):
    assert encode_label(MessageVector.zeros(1, 3), code3)[0] == 0
    assert encode_label(MessageVector([FieldElement(1, 0, 3)]), code3)[0] == 1
    assert encode_label(MessageVector([FieldElement(2, 1, 3)]), code3)[0] == -1 + 1j
    with pytest.raises(ValueError):
        encode_label(MessageVector.zeros(2, 3), code3)


def test_decode_examples(code3):
    assert decode_label(np.array([-1 + 1j]), code3) == MessageVector([FieldElement(2, 1, 3)])
    assert decode_label(np.array([0j]), code3) == MessageVector.zeros(1, 3)
    with pytest.raises(NotACodeword):
        decode_label(np.array([0.4 + 0j]), code3)


def test_label_roundtrip_exhaustive_p3(code3):
    points = set()
    for s in F9:
        w = MessageVector(np.array([s]), 3)
        t = encode_label(w, code3)
        assert decode_label(t, code3) == w
        points.add(complex(t[0]))
    assert len(points) == 9  # injective


def test_nesting_codewords_quantize_to_zero():
    code = NestedLatticeCode(7, 2, 5.0)
    rng = np.random.default_rng(1)
    w = rng.integers(0, 7, (500, 2)) + 1j * rng.integers(0, 7, (500, 2))
    assert np.all(code.quantize_coarse(code.encode(w)) == 0)


# ---------------------------------------------------------
# Construction A with a non-trivial generator
# ---------------------------------------------------------


@pytest.fixture
def coded():
    return NestedLatticeCode.random_systematic(3, 3, 2, 3.0, np.random.default_rng(7))


def brute_fine_nearest(x, code, radius=2):
    """Enumerate fine-lattice points (tau/p) k, k a Gaussian integer vector
    near x whose residue is a codeword; return the nearest."""
    p, s = code.p, code.tau / code.p
    code_words = {
        tuple(reduce_mod(array_matmul(np.array(w), code.G, p), p))
        for w in itertools.product(
            [complex(a, b) for a in range(p) for b in range(p)], repeat=code.r
        )
    }
    base = np.round(x.real / s) + 1j * np.round(x.imag / s)
    offsets = range(-radius * p, radius * p + 1)
    best, best_d = None, np.inf
    per_coord = [
        [base[i] + dx + 1j * dy for dx in offsets for dy in offsets] for i in range(code.n)
    ]
    # coordinates decouple given the residue pattern; search codewords
    for c in code_words:
        pt = []
        for i in range(code.n):
            cand = [k for k in per_coord[i] if reduce_mod(k, p) == c[i]]
            pt.append(min(cand, key=lambda k: abs(x[i] - s * k)))
        pt = s * np.array(pt)
        d = np.sum(np.abs(x - pt) ** 2)
        if d < best_d:
            best, best_d = pt, d
    return best


def test_generator_is_systematic_and_counts_cosets(coded):
    assert coded.r == 2 and coded.n == 3
    assert np.array_equal(coded.G[:, :2], np.eye(2))
    offsets = coded._codeword_offsets()
    distinct = {tuple(np.round(coded.mod_lambda(o), 9)) for o in offsets}
    assert len(distinct) == 3 ** (2 * 2)


def test_fine_quantizer_matches_brute_force(coded):
    rng = np.random.default_rng(3)
    for _ in range(25):
        x = rng.uniform(-3, 3, 3) + 1j * rng.uniform(-3, 3, 3)
        q = coded.quantize_fine(x)
        oracle = brute_fine_nearest(x, coded)
        assert np.isclose(np.sum(np.abs(x - q) ** 2), np.sum(np.abs(x - oracle) ** 2))


def test_coded_roundtrip_and_rejects_non_codewords(coded):
    rng = np.random.default_rng(4)
    w = rng.integers(0, 3, (200, 2)) + 1j * rng.integers(0, 3, (200, 2))
    t = coded.encode(w)
    assert np.array_equal(coded.decode(t), w)
    noisy = t + 0.1 * (rng.standard_normal(t.shape) + 1j * rng.standard_normal(t.shape))
    assert np.array_equal(coded.decode(coded.mod_lambda(coded.quantize_fine(noisy))), w)
    # a point of p^-1 Lambda outside the code
    bad = t[0].copy()
    for delta in (1, 1j, 2, 1 + 1j):
        cand = bad.copy()
        cand[2] += delta * coded.tau / 3
        try:
            coded.decode(coded.mod_lambda(cand))
        except NotACodeword:
            break
    else:
        pytest.fail("no non-codeword rejected")


def test_construction_limits():
    with pytest.raises(ValueError):
        NestedLatticeCode(3, 2, 1.0, G=[[2, 1]])
    with pytest.raises(ValueError):
        NestedLatticeCode.random_systematic(7, 6, 5, 1.0, np.random.default_rng(0))
    assert NestedLatticeCode(3, 4, 1.0).rate == pytest.approx(2 * np.log2(3))


# ---------------------------------------------------------
# Z[j]-module property and label scaling
# ---------------------------------------------------------


def test_linearity_exhaustive_p3(code3):
    coeffs = [GaussianInteger(x, y) for x in range(-3, 4) for y in range(-3, 4)]
    ws = np.array(F9)
    t = code3.encode(ws[:, None])[:, 0]
    for a, a2 in itertools.product(coeffs, repeat=2):
        lhs = code3.mod_lambda(complex(a) * t[:, None] + complex(a2) * t[None, :])
        rhs_msg = reduce_mod(complex(a) * ws[:, None] + complex(a2) * ws[None, :], 3)
        rhs = code3.encode(rhs_msg[..., None])[..., 0]
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_linearity_randomized_n4():
    code = NestedLatticeCode(7, 4, 4.2)
    rng = np.random.default_rng(5)
    for _ in range(200):
        w, w2 = (rng.integers(0, 7, 4) + 1j * rng.integers(0, 7, 4) for _ in range(2))
        a, a2 = (complex(*rng.integers(-20, 21, 2)) for _ in range(2))
        lhs = code.mod_lambda(a * code.encode(w) + a2 * code.encode(w2))
        rhs = code.encode(reduce_mod(a * w + a2 * w2, 7))
        assert np.allclose(lhs, rhs, atol=1e-9)


def test_scale_label_examples(code3):
    t = code3.encode([1])
    assert np.allclose(scale_label(FieldElement(1, 0, 3), t, code3), t)
    assert np.allclose(scale_label(FieldElement(0, 0, 3), t, code3), 0)
    assert np.allclose(scale_label(FieldElement(2, 0, 3), t, code3), code3.encode([2]))


def test_scale_label_commutes_exhaustive(code3):
    for c, s in itertools.product(F9, F9):
        fe = FieldElement(int(c.real), int(c.imag), 3)
        lhs = scale_label(fe, code3.encode([s]), code3)
        assert np.allclose(lhs, code3.encode(reduce_mod([c * s], 3)))


# ---------------------------------------------------------
# Dither
# ---------------------------------------------------------


def test_dither_deterministic_and_in_cell():
    code = NestedLatticeCode(3, 2, 2.0)
    a = sample_dither(code, 42)
    assert np.array_equal(a, sample_dither(code, 42))
    d = code.sample_dither(np.random.default_rng(1), 10**4)
    assert d.shape == (10**4, 2)
    assert np.all((-1 <= d.real) & (d.real < 1) & (-1 <= d.imag) & (d.imag < 1))


def test_dither_mean_within_clt_bound():
    code = NestedLatticeCode(3, 1, 3.0)
    d = code.sample_dither(np.random.default_rng(2), 10**5)[:, 0]
    sigma = code.tau / np.sqrt(12)
    bound = 3 * sigma / np.sqrt(10**5)
    assert abs(d.real.mean()) < bound
    assert abs(d.imag.mean()) < bound


def _cell_histogram(x, tau, bins=4):
    u = np.floor((x.real / tau + 0.5) * bins).astype(int)
    v = np.floor((x.imag / tau + 0.5) * bins).astype(int)
    return np.bincount(u * bins + v, minlength=bins * bins)


def test_crypto_lemma_uniformity():
    code = NestedLatticeCode(3, 1, 3.0)
    t = code.encode([2 + 1j])
    d = code.sample_dither(np.random.default_rng(11), 10**5)
    x = code.mod_lambda(t + d)[:, 0]
    counts = _cell_histogram(x, code.tau)
    assert stats.chisquare(counts).pvalue > 0.01


def test_second_moment_of_dithered_codewords():
    code = NestedLatticeCode.for_snr(3, 2, 50.0)
    rng = np.random.default_rng(12)
    w = rng.integers(0, 3, (10**5, 2)) + 1j * rng.integers(0, 3, (10**5, 2))
    x = code.mod_lambda(code.encode(w) + code.sample_dither(rng, 10**5))
    power = np.mean(np.abs(x) ** 2)
    assert power == pytest.approx(code.second_moment, rel=0.01)
    assert code.second_moment == pytest.approx(50.0)
