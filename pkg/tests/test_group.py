import random

import pytest
from cryptography.hazmat.primitives.asymmetric import ec
from hypothesis import given, settings, strategies as st

from dccse import p256
from dccse.errors import DecodeError, DivisionByZero, OverrideUnsupported
from dccse.group import (CountingGroup, HashSuite, P256Group, ToyGroup,
                         hash_eval, make_group)


def egcd_inverse(a, m):
    # extended Euclid, independent of pow(a, -1, m)
    old_r, r = a, m
    old_s, s = 1, 0
    while r:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_s, s = s, old_s - qt * s
    assert old_r == 1
    return old_s % m


def ref_base_mul(k):
    pn = ec.derive_private_key(k, ec.SECP256R1()).public_key().public_numbers()
    return (pn.x, pn.y)


# --- scalar field ---

def test_toy_inverse_of_two_is_51():
    assert egcd_inverse(2, 101) == 51
    assert ToyGroup().sinv(2) == 51


def test_inverse_of_one():
    assert ToyGroup().sinv(1) == 1
    assert P256Group().sinv(1) == 1


def test_toy_mul_by_inverse():
    G = ToyGroup()
    assert G.smul(7, G.sinv(2)) == 54 == 7 * 51 % 101


@pytest.mark.parametrize("G", [ToyGroup(), P256Group()], ids=["toy", "p256"])
def test_invert_zero_raises(G):
    with pytest.raises(DivisionByZero):
        G.sinv(0)
    with pytest.raises(ZeroDivisionError):
        G.sinv(G.q)


@pytest.mark.parametrize("G", [ToyGroup(), P256Group()], ids=["toy", "p256"])
def test_inverse_property_1000(G):
    rng = random.Random(1)
    for _ in range(1000):
        x = G.random_scalar(rng)
        assert G.smul(x, G.sinv(x)) == 1
        assert G.smul(x, egcd_inverse(x, G.q)) == 1


def test_toy_brute_force_against_integer_oracle():
    G = ToyGroup()
    for a in range(101):
        assert G.sneg(a) == (-a) % 101
        if a:
            assert a * G.sinv(a) % 101 == 1
        for b in range(101):
            assert G.sadd(a, b) == (a + b) % 101
            assert G.smul(a, b) == (a * b) % 101
            assert G.add(a, b) == (a + b) % 101
            assert G.sub(a, b) == (a - b) % 101
            assert G.scalar_mul(a, b) == (a * b) % 101


# --- points ---

def test_toy_scalar_mul_generator():
    assert ToyGroup().scalar_mul(7, 1) == 7


@pytest.mark.parametrize("G", [ToyGroup(), P256Group()], ids=["toy", "p256"])
def test_order_annihilates_generator(G):
    assert G.is_identity(G.scalar_mul(G.q, G.generator))
    assert not G.is_identity(G.generator)
    assert G.scalar_mul(0, G.generator) == G.identity
    assert G.scalar_mul(1, G.generator) == G.generator


@pytest.mark.parametrize("G", [ToyGroup(), P256Group()], ids=["toy", "p256"])
def test_add_negation_is_identity(G):
    Q = G.base_mul(12345)
    assert G.add(Q, G.neg(Q)) == G.identity
    assert G.add(Q, G.identity) == Q


def test_p256_base_mul_matches_cryptography():
    G = P256Group()
    rng = random.Random(2)
    for _ in range(50):
        k = G.random_scalar(rng)
        assert G.base_mul(k) == ref_base_mul(k)


def test_p256_variable_base_matches_cryptography():
    G = P256Group()
    rng = random.Random(3)
    for _ in range(30):
        a, b = G.random_scalar(rng), G.random_scalar(rng)
        assert G.scalar_mul(a, ref_base_mul(b)) == ref_base_mul(a * b % G.q)


def test_p256_doubling_through_add():
    G = P256Group()
    Q = G.base_mul(777)
    assert G.add(Q, Q) == ref_base_mul(1554)


@pytest.mark.parametrize("G", [ToyGroup(), P256Group()], ids=["toy", "p256"])
def test_distributivity_1000(G):
    rng = random.Random(4)
    n = 1000 if G.backend_id == "toy" else 200
    for _ in range(n):
        a, b = G.random_scalar(rng, exclude=()), G.random_scalar(rng, exclude=())
        Q = G.base_mul(G.random_scalar(rng))
        assert G.scalar_mul(G.sadd(a, b), Q) == G.add(G.scalar_mul(a, Q), G.scalar_mul(b, Q))


def test_p256_generated_points_on_curve():
    G = P256Group()
    rng = random.Random(5)
    for _ in range(20):
        assert p256.is_on_curve(G.scalar_mul(G.random_scalar(rng), G.base_mul(9)))


# --- RFC 9380 hash-to-curve (P256_XMD:SHA-256_SSWU_RO_) ---

QUUX_DST = b"QUUX-V01-CS02-with-P256_XMD:SHA-256_SSWU_RO_"


@pytest.mark.parametrize("msg,x,y", [
    (b"",
     0x2c15230b26dbc6fc9a37051158c95b79656e17a1a920b11394ca91c44247d3e4,
     0x8a7a74985cc5c776cdfe4b1f19884970453912e9d31528c060be9ab5c43e8415),
    (b"abc",
     0x0bb8b87485551aa43ed54f009230450b492fead5f1cc91658775dac4a3388a0f,
     0x5c41b3d0731a27a7b14bc0bf0ccded2d8751f83493404c84a88e71ffd424212e),
])
def test_hash_to_curve_rfc9380_vectors(msg, x, y):
    assert p256.hash_to_curve(msg, QUUX_DST) == (x, y)


# --- encodings ---

def test_toy_point_29_encoding():
    G = ToyGroup()
    assert G.encode_point(29) == b"\x00\x1d"
    assert G.decode_point(b"\x00\x1d") == 29


@pytest.mark.parametrize("G", [ToyGroup(), P256Group()], ids=["toy", "p256"])
def test_identity_round_trip(G):
    assert G.decode_point(G.encode_point(G.identity)) == G.identity


@pytest.mark.parametrize("G", [ToyGroup(), P256Group()], ids=["toy", "p256"])
def test_truncated_input_rejected(G):
    with pytest.raises(DecodeError):
        G.decode_point(G.encode_point(G.generator)[:-1])
    with pytest.raises(DecodeError):
        G.decode_scalar(G.encode_scalar(1)[:-1])


def test_non_canonical_encodings_rejected():
    with pytest.raises(DecodeError):
        ToyGroup().decode_point((101).to_bytes(2, "big"))
    with pytest.raises(DecodeError):
        ToyGroup().decode_scalar(bytes([101]))
    G = P256Group()
    with pytest.raises(DecodeError):
        G.decode_scalar(G.q.to_bytes(32, "big"))
    with pytest.raises(DecodeError):
        G.decode_point(b"\x04" + bytes(32))
    with pytest.raises(DecodeError):
        G.decode_point(b"\x02" + p256.p.to_bytes(32, "big"))


def test_p256_off_curve_x_rejected():
    G = P256Group()
    x = 0
    while p256.sqrt((x ** 3 + p256.a * x + p256.b) % p256.p) is not None:
        x += 1
    with pytest.raises(DecodeError):
        G.decode_point(b"\x02" + x.to_bytes(32, "big"))


@pytest.mark.parametrize("G", [ToyGroup(), P256Group()], ids=["toy", "p256"])
def test_round_trips_1000(G):
    rng = random.Random(6)
    for _ in range(1000):
        k = G.random_scalar(rng, exclude=())
        assert G.decode_scalar(G.encode_scalar(k)) == k
        d = rng.getrandbits(8 * G.digest_len).to_bytes(G.digest_len, "big")
        assert G.decode_digest(G.encode_digest(d)) == d
    n = 1000 if G.backend_id == "toy" else 200
    for _ in range(n):
        Q = G.base_mul(G.random_scalar(rng, exclude=()))
        enc = G.encode_point(Q)
        assert len(enc) == G.point_len
        assert G.decode_point(enc) == Q
        assert G.encode_point(G.decode_point(enc)) == enc


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=p256.n - 1))
def test_p256_point_round_trip_property(k):
    G = P256Group()
    Q = G.base_mul(k)
    assert G.decode_point(G.encode_point(Q)) == Q


# --- hash suite ---

def test_toy_default_hashes():
    G = ToyGroup()
    s = HashSuite(G)
    assert s.H(b"\x01\x00") == 256 % 100 + 1
    assert s.H(b"\x64") == 1  # 100 mod 100 + 1
    assert s.H1(b"\x00") == 1  # 0 maps to the generator
    assert s.H1(b"\x00\x65") == 1  # 101 mod 101 = 0
    assert s.H1(b"\x03") == 3
    assert s.H2(12) == 13
    assert s.H3(29) == b"\x00\x1d"


def test_override_takes_precedence():
    G = ToyGroup()
    s = HashSuite(G, {("H2", G.encode_point(39)): 2, ("H", b"w0"): 11})
    assert hash_eval(s, "H2", 39) == 2
    assert hash_eval(s, "H", b"w0") == 11
    assert hash_eval(s, "H2", 38) == 39  # default path untouched


def test_override_rejects_zero_scalar():
    with pytest.raises(ValueError):
        HashSuite(ToyGroup(), {("H", b"x"): 0})


def test_override_on_production_raises():
    with pytest.raises(OverrideUnsupported):
        HashSuite(P256Group(), {("H", b"w"): 5})
    with pytest.raises(OverrideUnsupported):
        HashSuite(P256Group()).set_override("H3", b"", b"\x00" * 32)


def test_hash_eval_type_checks():
    s = HashSuite(ToyGroup())
    with pytest.raises(TypeError):
        hash_eval(s, "H", 5)
    with pytest.raises(ValueError):
        hash_eval(s, "H9", b"")


def test_production_hashes_deterministic_and_nonzero():
    G = P256Group()
    s = HashSuite(G)
    rng = random.Random(7)
    for _ in range(100):
        m = rng.getrandbits(64).to_bytes(8, "big")
        assert s.H(m) == s.H(m)
        assert 1 <= s.H(m) < G.q
        Q = s.H1(m)
        assert p256.is_on_curve(Q) and Q is not None
        assert 1 <= s.H2(Q) < G.q
        assert len(s.H3(Q)) == 32


def test_production_hashes_are_domain_separated():
    G = P256Group()
    s = HashSuite(G)
    Q = G.base_mul(5)
    # H and H2 read the same bytes but must not agree
    assert s.H(G.encode_point(Q)) != s.H2(Q)


def test_counting_group_counts_and_delegates():
    G = CountingGroup(ToyGroup())
    s = HashSuite(G)
    assert G.scalar_mul(3, 4) == 12
    assert G.sub(5, 7) == 99
    s.H3(4)
    assert G.snapshot() == {"hash_H3": 1, "point_sub": 1, "scalar_mul": 1}
    G.reset()
    assert G.snapshot() == {}


def test_make_group_rejects_unknown():
    with pytest.raises(ValueError):
        make_group("bn254")
    assert make_group("toy").descriptor.q == 101
