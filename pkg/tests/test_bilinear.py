import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from nibe.bilinear import BackendId, CountingGroup, CurveSource, ToyGroup, ToySource, ToyTarget
from nibe.errors import NonCanonicalEncoding, PointNotOnCurve, Unsupported, WrongLength


def test_toy_generator_is_one():
    G = ToyGroup(101)
    assert G.generator() == ToySource(1)
    assert G.generator() == G.generator()
    assert G.exp(G.generator(), 101) == G.identity()


def test_toy_rejects_composite_modulus():
    with pytest.raises(ValueError):
        ToyGroup(1001)


def test_random_scalar_reproducible_and_in_range():
    G = ToyGroup(101)
    a = [G.random_scalar(random.Random(5)) for _ in range(3)]
    assert len(set(a)) == 1
    r = random.Random(1)
    assert all(G.random_scalar(r) < 101 for _ in range(10_000))


def test_random_scalar_uniform_chi_square():
    G = ToyGroup(101)
    r = random.Random(2024)
    counts = [0] * 101
    for _ in range(10**5):
        counts[G.random_scalar(r)] += 1
    assert chisquare(counts).pvalue > 0.001


def test_toy_exp_mul_examples():
    G = ToyGroup(101)
    g = G.generator()
    assert G.exp(g, 0) == G.identity()
    assert G.exp(g, 7) == ToySource(7)
    assert G.mul(ToySource(40), ToySource(70)) == ToySource(9)
    assert G.mul(ToySource(40), G.inv(ToySource(40))) == G.identity()


def test_toy_pair_examples():
    G = ToyGroup(101)
    assert G.pair(ToySource(3), ToySource(5)) == ToyTarget(15)
    assert G.pair(G.generator(), G.identity()) == G.target_identity()
    assert G.pair(G.generator(), G.generator()) != G.target_identity()


@settings(max_examples=200)
@given(st.integers(0, 1008), st.integers(0, 1008), st.integers(0, 1008))
def test_toy_group_laws(a, b, x):
    G = ToyGroup()
    g = G.generator()
    X = G.exp(g, x)
    assert G.exp(G.exp(g, a), b) == G.exp(g, a * b % G.p)
    assert G.exp(X, (a + b) % G.p) == G.mul(G.exp(X, a), G.exp(X, b))
    assert G.mul(G.exp(g, a), G.exp(g, b)) == G.mul(G.exp(g, b), G.exp(g, a))
    gt = G.pair_generator()
    assert G.mul_target(G.exp_target(gt, a), G.inv_target(G.exp_target(gt, a))) == G.target_identity()
    assert G.exp_target(gt, (a + b) % G.p) == G.mul_target(G.exp_target(gt, a), G.exp_target(gt, b))


def test_toy_bilinearity_ten_thousand(toy):
    r = random.Random(3)
    g = toy.generator()
    gt = toy.pair_generator()
    for _ in range(10**4):
        a, b = toy.random_scalar(r), toy.random_scalar(r)
        assert toy.pair(toy.exp(g, a), toy.exp(g, b)) == toy.exp_target(gt, a * b % toy.p)


def test_toy_serialization():
    G = ToyGroup(101)
    assert G.serialize(ToySource(7)) == bytes.fromhex("0000000000000007")
    r = random.Random(4)
    for _ in range(1000):
        x = G.random_element(r)
        assert G.deserialize_source(G.serialize(x)) == x
        assert G.serialize(G.deserialize_source(G.serialize(x))) == G.serialize(x)
    with pytest.raises(WrongLength):
        G.deserialize_source(b"\x00" * 7)
    with pytest.raises(NonCanonicalEncoding):
        G.deserialize_source((101).to_bytes(8, "big"))
    assert G.descriptor.backend_id == BackendId.TOY == 0x01


def test_toy_dlog():
    G = ToyGroup()
    g = G.generator()
    assert G.toy_dlog(G.exp(g, 42)) == 42
    assert G.toy_dlog(g) == 1
    assert G.toy_dlog(G.identity()) == 0


def test_curve_dlog_unsupported(curve):
    with pytest.raises(Unsupported):
        curve.toy_dlog(curve.generator())


def test_multi_exp_matches_loop(toy):
    r = random.Random(8)
    bases = [toy.random_element(r) for _ in range(5)]
    exps = [r.randrange(50) for _ in range(5)]
    expected = toy.identity()
    for b, e in zip(bases, exps):
        expected = toy.mul(expected, toy.exp(b, e))
    assert toy.multi_exp(bases, exps) == expected


def test_counting_group_tallies(toy):
    C = CountingGroup(toy)
    g = C.generator()
    C.pair(C.exp(g, 3), g)
    C.multi_exp([g, g], [1, 2])
    assert C.counts == {"exp": 1, "pair": 1, "multi_exp": 1}


@pytest.mark.slow
def test_curve_bilinearity(curve):
    r = random.Random(10)
    g = curve.generator()
    gt = curve.pair_generator()
    assert gt != curve.target_identity()
    for _ in range(10):
        a, b = curve.random_scalar(r), curve.random_scalar(r)
        assert curve.pair(curve.exp(g, a), curve.exp(g, b)) == curve.exp_target(gt, a * b)


@pytest.mark.slow
def test_curve_serialization_round_trip(curve):
    r = random.Random(11)
    d = curve.descriptor
    assert d.backend_id == BackendId.CURVE
    for _ in range(3):
        x = curve.random_element(r)
        data = curve.serialize(x)
        assert len(data) == d.source_len == 144
        assert curve.deserialize_source(data) == x
    ident = curve.serialize(curve.identity())
    assert curve.deserialize_source(ident) == curve.identity()
    t = curve.random_target(r)
    assert curve.deserialize_target(curve.serialize(t)) == t
    with pytest.raises(WrongLength):
        curve.deserialize_source(data[:-1])


def test_curve_rejects_bad_points(curve):
    data = bytearray(curve.serialize(curve.generator()))
    # a flipped x bit lands off the curve or outside the prime-order subgroup
    bad = bytearray(data)
    bad[47] ^= 0x01
    with pytest.raises((PointNotOnCurve, NonCanonicalEncoding)):
        curve.deserialize_source(bytes(bad))
    no_flag = bytearray(data)
    no_flag[0] &= 0x7F
    with pytest.raises(NonCanonicalEncoding):
        curve.deserialize_source(bytes(no_flag))


def test_curve_mirror_consistency(curve):
    r = random.Random(12)
    x = curve.random_element(r)
    y = curve.random_element(r)
    assert curve.mirrors_consistent([x, y], r)
    assert not curve.mirrors_consistent([CurveSource(x.p1, y.p2)], r)


@pytest.mark.slow
def test_curve_deserializer_fuzz(curve):
    """Mutated encodings either decode to a valid element or raise a FormatError."""
    from nibe.errors import FormatError

    r = random.Random(13)
    good = curve.serialize(curve.random_element(r))
    for _ in range(300):
        bad = bytearray(good)
        i = r.randrange(len(bad))
        bad[i] ^= 1 << r.randrange(8)
        try:
            x = curve.deserialize_source(bytes(bad))
        except FormatError:
            continue
        assert curve.mirrors_consistent([x], r) in (True, False)
    gt = curve.serialize(curve.random_target(r))
    for _ in range(5):
        bad = bytearray(gt)
        bad[r.randrange(len(bad))] ^= 0x80
        with pytest.raises(FormatError):
            curve.deserialize_target(bytes(bad))
