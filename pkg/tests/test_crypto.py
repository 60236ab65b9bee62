import hashlib
import random

import pytest
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat
from hypothesis import given, settings
from hypothesis import strategies as st

from cvcc.crypto import (
    P256,
    TOY,
    CipherText,
    batch_verify,
    canon,
    hash,
    scalar_mul,
    schnorr_sign,
    schnorr_verify,
    stream_decrypt,
    stream_encrypt,
    xor,
)
from cvcc.crypto.group import ToyGroup
from cvcc.crypto.schnorr import Signature
from cvcc.errors import (
    EmptyBatch,
    FieldTooLong,
    InvalidElement,
    InvalidGroup,
    LengthMismatch,
    TagMismatch,
    ZeroScalar,
)


def ref_canon(fields):
    return b"".join(len(f).to_bytes(2, "big") + f for f in fields)


def test_hash_fips_empty_vector():
    assert hash(b"").hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"


def test_hash_matches_reference_and_separates_inputs():
    assert hash(b"a") == hashlib.sha256(b"a").digest()
    assert hash(b"a") != hash(b"b")
    assert hash(b"x" * 100) == hash(b"x" * 100)


def test_xor():
    a = bytes(range(16))
    assert xor(a, a) == bytes(16)
    assert xor(a, bytes(16)) == a
    assert xor(b"\x0f", b"\xf0") == b"\xff"
    with pytest.raises(LengthMismatch):
        xor(b"ab", b"a")


def test_canon_examples():
    assert canon([b"AB"]) == b"\x00\x02AB"
    assert canon([b"A", b"B"]) != canon([b"AB"])
    assert canon([]) == b""
    assert canon([b"x" * 0xFFFF])[:2] == b"\xff\xff"
    with pytest.raises(FieldTooLong):
        canon([b"x" * 0x10000])


@settings(max_examples=10_000, deadline=None)
@given(st.lists(st.binary(max_size=6), max_size=4), st.lists(st.binary(max_size=6), max_size=4))
def test_canon_injective(a, b):
    if a != b:
        assert canon(a) != canon(b)
    assert canon(a) == ref_canon(a)


def test_toy_group_table_matches_repeated_multiplication():
    subgroup = sorted({pow(2, k, 23) for k in range(11)})
    for base in subgroup:
        acc = 1
        for k in range(11):
            assert scalar_mul(TOY.element(base), k).value == acc
            acc = acc * base % 23


def test_scalar_mul_examples():
    G = TOY.generator
    assert scalar_mul(G, 5).value == 9
    assert scalar_mul(G, 0).value == 1
    assert scalar_mul(G, 11).value == 1


def test_toy_rejects_non_subgroup_elements():
    with pytest.raises(InvalidElement):
        TOY.element(5)  # a non-residue mod 23
    with pytest.raises(InvalidElement):
        TOY.decode((23).to_bytes(32, "big"))
    with pytest.raises(InvalidGroup):
        ToyGroup(23, 11, 5)
    with pytest.raises(InvalidElement):
        scalar_mul(9, 2)


def test_p256_matches_cryptography_library():
    rng = random.Random(4)
    for _ in range(10):
        d = rng.randrange(1, P256.order)
        ref = ec.derive_private_key(d, ec.SECP256R1()).public_key().public_bytes(
            Encoding.X962, PublicFormat.CompressedPoint)
        ours = scalar_mul(P256.generator, d)
        assert ours.encode() == ref
        assert P256.decode(ref) == ours


def test_p256_group_order_and_encoding():
    assert scalar_mul(P256.generator, P256.order).is_identity()
    assert P256.decode(P256.identity.encode()).is_identity()
    with pytest.raises(InvalidElement):
        P256.decode(b"\x04" + bytes(32))


def test_schnorr_toy_hand_evaluated():
    msg = b"fixed message"
    X = TOY.element(8)
    assert scalar_mul(TOY.generator, 3) == X
    sig = schnorr_sign(TOY, 3, msg, 5)
    assert sig.R.value == 9
    enc = lambda v: v.to_bytes(32, "big")
    e = int.from_bytes(hashlib.sha256(ref_canon([b"sig", enc(9), enc(8), msg])).digest(), "big") % 11
    assert sig.s == (5 + e * 3) % 11
    assert schnorr_verify(X, msg, sig)
    assert schnorr_sign(TOY, 3, msg, 5) == sig


def test_schnorr_rejects_zero_scalars_and_identity_key():
    with pytest.raises(ZeroScalar):
        schnorr_sign(TOY, 0, b"m", 5)
    with pytest.raises(ZeroScalar):
        schnorr_sign(TOY, 3, b"m", 11)
    with pytest.raises(InvalidElement):
        schnorr_verify(TOY.identity, b"m", schnorr_sign(TOY, 3, b"m", 5))


def test_schnorr_response_plus_one_fails_everywhere_on_toy():
    for x in range(1, 11):
        X = scalar_mul(TOY.generator, x)
        for k in range(1, 11):
            sig = schnorr_sign(TOY, x, b"msg", k)
            assert not schnorr_verify(X, b"msg", Signature(sig.R, (sig.s + 1) % 11))


def test_schnorr_single_bit_flips_fail_on_curve():
    x = 0xC0FFEE
    X = scalar_mul(P256.generator, x)
    msg = b"sixteen byte msg"
    sig = schnorr_sign(P256, x, msg, 0xBEEF)
    for bit in range(len(msg) * 8):
        flipped = bytearray(msg)
        flipped[bit // 8] ^= 1 << (bit % 8)
        assert not schnorr_verify(X, bytes(flipped), sig)


def test_toy_group_forgery_rate_is_about_one_in_q():
    # Documents why tamper suites run on P-256: with q = 11 a flipped
    # message still verifies whenever the challenge collides mod q.
    X = scalar_mul(TOY.generator, 3)
    sig = schnorr_sign(TOY, 3, b"m" * 32, 5)
    hits = 0
    for bit in range(256):
        flipped = bytearray(b"m" * 32)
        flipped[bit // 8] ^= 1 << (bit % 8)
        hits += schnorr_verify(X, bytes(flipped), sig)
    assert 0 < hits < 256 // 4


@settings(max_examples=1000, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.binary(max_size=64))
def test_schnorr_roundtrip_toy(x, k, msg):
    assert schnorr_verify(scalar_mul(TOY.generator, x), msg, schnorr_sign(TOY, x, msg, k))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, P256.order - 1), st.integers(1, P256.order - 1), st.binary(max_size=64))
def test_schnorr_roundtrip_curve(x, k, msg):
    assert schnorr_verify(scalar_mul(P256.generator, x), msg, schnorr_sign(P256, x, msg, k))


def test_signature_encoding_roundtrip():
    sig = schnorr_sign(P256, 12345, b"m", 678)
    assert Signature.decode(P256, sig.encode()) == sig
    assert len(sig.encode()) == 65
    assert len(schnorr_sign(TOY, 3, b"m", 5).encode()) == 64


def _toy_items(rng, n, msg_len=8):
    items = []
    for _ in range(n):
        x, k = rng.randrange(1, 11), rng.randrange(1, 11)
        msg = rng.randbytes(msg_len)
        items.append((scalar_mul(TOY.generator, x), msg, schnorr_sign(TOY, x, msg, k)))
    return items


def test_batch_examples():
    rng = random.Random(11)
    items = _toy_items(rng, 20)
    assert batch_verify(items) is True
    X, msg, sig = items[7]
    forged = items[:7] + [(X, msg, Signature(sig.R, (sig.s + 3) % 11))] + items[8:]
    assert batch_verify(forged) is False
    for item in items[:5]:
        assert batch_verify([item]) == schnorr_verify(*item)
    with pytest.raises(EmptyBatch):
        batch_verify([])


def test_batch_is_deterministic():
    items = _toy_items(random.Random(3), 10)
    assert batch_verify(items) == batch_verify(list(items))


def test_batch_rejects_multiple_forgeries_on_curve():
    rng = random.Random(5)
    items = []
    for _ in range(6):
        x, k = rng.randrange(1, P256.order), rng.randrange(1, P256.order)
        msg = rng.randbytes(16)
        items.append((scalar_mul(P256.generator, x), msg, schnorr_sign(P256, x, msg, k)))
    assert batch_verify(items)
    for trial in range(20):
        bad = list(items)
        for i in rng.sample(range(6), rng.randint(1, 6)):
            X, msg, sig = bad[i]
            bad[i] = (X, msg + b"!", sig)
        assert not batch_verify(bad)


def test_stream_cipher_vector_against_standalone_keystream():
    key, nonce = hashlib.sha256(b"k").digest(), hashlib.sha256(b"n").digest()
    pt = bytes(range(70))
    ks = b"".join(
        hashlib.sha256(ref_canon([b"ks", key, nonce, i.to_bytes(8, "big")])).digest() for i in range(3)
    )[:70]
    ct = stream_encrypt(key, nonce, pt)
    assert ct.body == bytes(a ^ b for a, b in zip(pt, ks))
    assert ct.tag == hashlib.sha256(ref_canon([b"tag", key, nonce, ct.body])).digest()


def test_stream_cipher_empty_and_roundtrip():
    key, nonce = hash(b"k"), hash(b"n")
    ct = stream_encrypt(key, nonce, b"")
    assert ct.body == b"" and stream_decrypt(key, ct) == b""
    rng = random.Random(2)
    for n in (1, 31, 32, 33, 4096):
        pt = rng.randbytes(n)
        assert stream_decrypt(key, stream_encrypt(key, nonce, pt)) == pt


def test_stream_cipher_detects_every_single_bit_corruption():
    key, nonce = hash(b"k"), hash(b"n")
    ct = stream_encrypt(key, nonce, b"secret payload!!")
    for name in ("nonce", "body", "tag"):
        value = getattr(ct, name)
        for bit in range(len(value) * 8):
            bad = bytearray(value)
            bad[bit // 8] ^= 1 << (bit % 8)
            fields = {"nonce": ct.nonce, "body": ct.body, "tag": ct.tag, name: bytes(bad)}
            with pytest.raises(TagMismatch):
                stream_decrypt(key, CipherText(**fields))
    with pytest.raises(TagMismatch):
        stream_decrypt(hash(b"other"), ct)


def test_primitives_are_pure():
    key, nonce = hash(b"k"), hash(b"n")
    assert stream_encrypt(key, nonce, b"abc") == stream_encrypt(key, nonce, b"abc")
    assert schnorr_sign(P256, 99, b"m", 7) == schnorr_sign(P256, 99, b"m", 7)
