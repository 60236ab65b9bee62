"""Prime-order group abstraction.

Two instantiations share one interface: a toy order-11 subgroup of Z*_23
(small enough for brute-force oracles) and the NIST P-256 curve.  Neither
is constant-time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from ..errors import InvalidElement, InvalidGroup
from .instrument import notify

SCALAR_LEN = 32


@dataclass(frozen=True)
class GroupElement:
    group: "Group" = field(repr=False, compare=False)
    value: object

    def encode(self) -> bytes:
        return self.group.encode(self)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return self.group.op(self, other)

    def is_identity(self) -> bool:
        return self == self.group.identity


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Group:
    kind: str
    name: str
    order: int
    generator: GroupElement
    identity: GroupElement
    element_len: int

    def scalar_bytes(self, k: int) -> bytes:
        return (k % self.order).to_bytes(SCALAR_LEN, "big")

    def scalar_from_bytes(self, data: bytes) -> int:
        """Decode a canonical scalar; values >= q are rejected."""
        if len(data) != SCALAR_LEN:
            raise InvalidElement("scalar must be 32 bytes")
        k = int.from_bytes(data, "big")
        if k >= self.order:
            raise InvalidElement("scalar not reduced")
        return k

    def public_key(self, data: bytes) -> GroupElement:
        """Decode an element usable as a public key (never the identity)."""
        e = self.decode(data)
        if e.is_identity():
            raise InvalidElement("identity is not a valid public key")
        return e

    # subclass surface
    def op(self, a: GroupElement, b: GroupElement) -> GroupElement:
        raise NotImplementedError

    def inv(self, a: GroupElement) -> GroupElement:
        raise NotImplementedError

    def mul(self, p: GroupElement, k: int) -> GroupElement:
        raise NotImplementedError

    def multi_mul(self, pairs: Iterable[tuple[GroupElement, int]]) -> GroupElement:
        acc = self.identity
        for p, k in pairs:
            acc = self.op(acc, self.mul(p, k))
        return acc

    def encode(self, e: GroupElement) -> bytes:
        raise NotImplementedError

    def decode(self, data: bytes) -> GroupElement:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.name}>"


class ToyGroup(Group):
    """Order-q subgroup of Z*_p, elements encoded as 32-byte big-endian residues."""

    kind = "ToyModP"

    def __init__(self, p: int, q: int, g: int):
        if not (_is_probable_prime(p) and _is_probable_prime(q)):
            raise InvalidGroup("p and q must be prime")
        if (p - 1) % q:
            raise InvalidGroup("q must divide p - 1")
        if g % p in (0, 1) or pow(g, q, p) != 1:
            raise InvalidGroup("generator must have order q")
        self.p = p
        self.order = q
        self.name = f"toy-p{p}-q{q}"
        self.element_len = 32
        self.identity = GroupElement(self, 1)
        self.generator = GroupElement(self, g % p)

    def element(self, v: int) -> GroupElement:
        if not 0 < v < self.p or pow(v, self.order, self.p) != 1:
            raise InvalidElement(f"{v} is not in the order-{self.order} subgroup")
        return GroupElement(self, v)

    def op(self, a, b):
        return GroupElement(self, a.value * b.value % self.p)

    def inv(self, a):
        return GroupElement(self, pow(a.value, -1, self.p))

    def mul(self, p, k):
        return GroupElement(self, pow(p.value, k % self.order, self.p))

    def encode(self, e):
        return e.value.to_bytes(self.element_len, "big")

    def decode(self, data):
        if len(data) != self.element_len:
            raise InvalidElement("bad element length")
        return self.element(int.from_bytes(data, "big"))


class CurveGroup(Group):
    """Short Weierstrass curve y^2 = x^3 + ax + b over GF(p), cofactor 1.

    Points are affine ``(x, y)`` tuples, the identity is ``None``.  Encoding
    is SEC1 compressed (33 bytes); the identity encodes as 33 zero bytes so
    every element has the same width.
    """

    kind = "StandardCurve"

    def __init__(self, name: str, p: int, a: int, b: int, n: int, gx: int, gy: int):
        if p % 4 != 3:
            raise InvalidGroup("square roots implemented for p = 3 mod 4 only")
        self.name = name
        self.p, self.a, self.b = p, a % p, b
        self.order = n
        self.element_len = 33
        self.identity = GroupElement(self, None)
        if not self._on_curve(gx, gy):
            raise InvalidGroup("generator not on curve")
        self.generator = GroupElement(self, (gx, gy))

    def _on_curve(self, x: int, y: int) -> bool:
        p = self.p
        return (y * y - (x * x * x + self.a * x + self.b)) % p == 0

    # Jacobian coordinates: (X, Y, Z) with x = X/Z^2, y = Y/Z^3; Z == 0 is infinity.
    def _to_jac(self, pt):
        return (1, 1, 0) if pt is None else (pt[0], pt[1], 1)

    def _from_jac(self, j):
        X, Y, Z = j
        if Z == 0:
            return None
        p = self.p
        zi = pow(Z, -1, p)
        zi2 = zi * zi % p
        return (X * zi2 % p, Y * zi2 * zi % p)

    def _jdouble(self, j):
        X, Y, Z = j
        if Z == 0 or Y == 0:
            return (1, 1, 0)
        p = self.p
        YY = Y * Y % p
        S = 4 * X * YY % p
        ZZ = Z * Z % p
        M = (3 * X * X + self.a * ZZ * ZZ) % p
        X3 = (M * M - 2 * S) % p
        Y3 = (M * (S - X3) - 8 * YY * YY) % p
        Z3 = 2 * Y * Z % p
        return (X3, Y3, Z3)

    def _jadd(self, j1, j2):
        X1, Y1, Z1 = j1
        X2, Y2, Z2 = j2
        if Z1 == 0:
            return j2
        if Z2 == 0:
            return j1
        p = self.p
        Z1Z1 = Z1 * Z1 % p
        Z2Z2 = Z2 * Z2 % p
        U1 = X1 * Z2Z2 % p
        U2 = X2 * Z1Z1 % p
        S1 = Y1 * Z2 * Z2Z2 % p
        S2 = Y2 * Z1 * Z1Z1 % p
        if U1 == U2:
            if S1 != S2:
                return (1, 1, 0)
            return self._jdouble(j1)
        H = (U2 - U1) % p
        R = (S2 - S1) % p
        HH = H * H % p
        HHH = H * HH % p
        V = U1 * HH % p
        X3 = (R * R - HHH - 2 * V) % p
        Y3 = (R * (V - X3) - S1 * HHH) % p
        Z3 = H * Z1 * Z2 % p
        return (X3, Y3, Z3)

    def op(self, a, b):
        return GroupElement(self, self._from_jac(self._jadd(self._to_jac(a.value), self._to_jac(b.value))))

    def inv(self, a):
        if a.value is None:
            return a
        x, y = a.value
        return GroupElement(self, (x, (-y) % self.p))

    _WINDOW = 4

    def _gen_table(self):
        # table[i][d] = d * 16^i * G in Jacobian form, for fixed-base multiplication
        if getattr(self, "_table", None) is None:
            table = []
            base = self._to_jac(self.generator.value)
            for _ in range((self.order.bit_length() + 3) // 4):
                row = [(1, 1, 0)]
                for _ in range(15):
                    row.append(self._jadd(row[-1], base))
                table.append([self._to_jac(self._from_jac(j)) for j in row])
                for _ in range(4):
                    base = self._jdouble(base)
            self._table = table
        return self._table

    def mul(self, p, k):
        k %= self.order
        if k == 0 or p.value is None:
            return self.identity
        if p.value == self.generator.value:
            acc = (1, 1, 0)
            for row in self._gen_table():
                if k & 15:
                    acc = self._jadd(acc, row[k & 15])
                k >>= 4
            return GroupElement(self, self._from_jac(acc))
        base = self._to_jac(p.value)
        small = [(1, 1, 0), base]
        for _ in range(14):
            small.append(self._jadd(small[-1], base))
        acc = (1, 1, 0)
        for shift in range((k.bit_length() + 3) // 4 * 4 - 4, -4, -4):
            for _ in range(4):
                acc = self._jdouble(acc)
            d = (k >> shift) & 15
            if d:
                acc = self._jadd(acc, small[d])
        return GroupElement(self, self._from_jac(acc))

    def multi_mul(self, pairs):
        # Straus interleaving: one shared doubling chain for all terms.
        terms = [(self._to_jac(pt.value), k % self.order) for pt, k in pairs]
        terms = [(j, k) for j, k in terms if k and j[2] != 0]
        if not terms:
            return self.identity
        acc = (1, 1, 0)
        for bit in range(max(k.bit_length() for _, k in terms) - 1, -1, -1):
            acc = self._jdouble(acc)
            for j, k in terms:
                if (k >> bit) & 1:
                    acc = self._jadd(acc, j)
        return GroupElement(self, self._from_jac(acc))

    def encode(self, e):
        if e.value is None:
            return bytes(self.element_len)
        x, y = e.value
        return bytes([2 | (y & 1)]) + x.to_bytes(32, "big")

    def decode(self, data):
        if len(data) != self.element_len:
            raise InvalidElement("bad element length")
        if data == bytes(self.element_len):
            return self.identity
        if data[0] not in (2, 3):
            raise InvalidElement("bad point prefix")
        p = self.p
        x = int.from_bytes(data[1:], "big")
        if x >= p:
            raise InvalidElement("x coordinate out of range")
        rhs = (x * x * x + self.a * x + self.b) % p
        y = pow(rhs, (p + 1) // 4, p)
        if y * y % p != rhs:
            raise InvalidElement("x is not on the curve")
        if (y & 1) != (data[0] & 1):
            y = p - y
        return GroupElement(self, (x, y))


TOY = ToyGroup(23, 11, 2)

P256 = CurveGroup(
    "P-256",
    p=0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF,
    a=-3,
    b=0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B,
    n=0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551,
    gx=0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296,
    gy=0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5,
)

GROUPS = {"toy": TOY, "standard-curve": P256}


def get_group(name: str) -> Group:
    try:
        return GROUPS[name]
    except KeyError:
        raise InvalidGroup(f"unknown group {name!r}; expected one of {sorted(GROUPS)}") from None


def scalar_mul(P: GroupElement, k: int) -> GroupElement:
    """k-fold group operation applied to P (counted)."""
    if not isinstance(P, GroupElement):
        raise InvalidElement("not a group element")
    notify("scalar_mul")
    return P.group.mul(P, k)
