"""Independent reference computations shared by the test modules.

Nothing here calls into cvcc for the value under test: encodings, hashes and
curve membership are recomputed from hashlib and the published constants.
"""
import hashlib

from cvcc.protocol import ReplayCache, verify_request

T0 = 1_000_000


def ref_canon(fields):
    return b"".join(len(f).to_bytes(2, "big") + f for f in fields)


def H(*fields):
    return hashlib.sha256(ref_canon([f.encode() if isinstance(f, str) else f for f in fields])).digest()


def outcome(receiver, data, now=T0):
    """Class name of the rejection, or "accepted"."""
    try:
        verify_request(receiver, data, now, ReplayCache(receiver.params.delta_ms))
    except Exception as exc:  # noqa: BLE001 - the class name is the outcome
        return type(exc).__name__
    return "accepted"


P256_P = 2**256 - 2**224 + 2**192 + 2**96 - 1
P256_B = 0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B


def on_p256(enc):
    """Independent SEC1 compressed-point check."""
    if enc[0] not in (2, 3):
        return False
    x = int.from_bytes(enc[1:], "big")
    if x >= P256_P:
        return False
    rhs = (x**3 - 3 * x + P256_B) % P256_P
    return rhs == 0 or pow(rhs, (P256_P - 1) // 2, P256_P) == 1


def expected_outcome(frame, bit, delta_ms, group):
    """Outcome predicted from the public layout alone."""
    byte = bit // 8
    mask = 0x80 >> (bit % 8)
    plen = int.from_bytes(frame[75:77], "big")
    chan = frame[2]
    if byte == 0 or 75 <= byte < 77:
        return "MalformedFrame"
    if byte in (1, 2):
        v = frame[byte] ^ mask
        if byte == 1:
            return "BadAuthenticator" if v in (1, 2, 3, 4) else "MalformedFrame"
        if v not in (1, 2, 3, 4):
            return "MalformedFrame"
        tail = lambda c: (65 + 33 + 8 + 65 + 32) if c == 1 else 32  # noqa: E731
        return "BadAuthenticator" if tail(v) == tail(chan) else "MalformedFrame"
    if 35 <= byte < 43:
        shift = (42 - byte) * 8 + (7 - bit % 8)
        return "StaleTimestamp" if 2**shift > delta_ms else "BadAuthenticator"
    cert_start = 77 + plen + (65 if chan == 1 else 32)
    if byte < cert_start:
        return "BadAuthenticator"
    off = byte - cert_start
    if 32 <= off < 65:
        flipped = bytearray(frame[cert_start + 32:cert_start + 65])
        flipped[off - 32] ^= mask
        return "BadAuthenticator" if on_p256(bytes(flipped)) else "BadCertificate"
    return "BadCertificate"
