"""RA initialization, vehicle/RSU registration and OBU login."""
from __future__ import annotations

import hmac
from dataclasses import dataclass, field

from ..crypto import Group, GroupElement, Signature, canon, hash_fields, schnorr_sign, schnorr_verify, xor
from ..crypto.primitives import be64
from ..errors import BadAuthenticator, BadCredentials, EmptyCredential, InvalidElement, InvalidGroup
from .frame import Channel, certificate_len

DEFAULT_DELTA_MS = 300


def derive_scalar(group: Group, *fields: bytes | str) -> int:
    """hash(canon(fields)) mod q, re-derived with a counter suffix while zero."""
    k = int.from_bytes(hash_fields(*fields), "big") % group.order
    ctr = 0
    while k == 0:
        ctr += 1
        k = int.from_bytes(hash_fields(*fields, be64(ctr)), "big") % group.order
    return k


@dataclass(frozen=True)
class PublicParams:
    """What every OBU and receiver may hold."""
    group: Group
    ra_public: GroupElement
    delta_ms: int


@dataclass(frozen=True)
class SystemParams:
    master_secret: int = field(repr=False)
    group: Group
    ra_public: GroupElement
    delta_ms: int = DEFAULT_DELTA_MS

    @property
    def secret_bytes(self) -> bytes:
        return self.group.scalar_bytes(self.master_secret)

    @property
    def public(self) -> PublicParams:
        return PublicParams(self.group, self.ra_public, self.delta_ms)


def ra_init(seed: bytes, group: Group, delta_ms: int = DEFAULT_DELTA_MS) -> SystemParams:
    if not isinstance(group, Group):
        raise InvalidGroup("group must be a Group instance")
    if delta_ms <= 0:
        raise ValueError("freshness window must be positive")
    s = derive_scalar(group, "ra", seed)
    return SystemParams(s, group, group.mul(group.generator, s), delta_ms)


@dataclass(frozen=True)
class Certificate:
    pid: bytes
    X: GroupElement
    expiry: int
    ra_sig: Signature

    @staticmethod
    def signed_message(pid: bytes, X: GroupElement, expiry: int) -> bytes:
        return canon(["cert", pid, X.encode(), be64(expiry)])

    def encode(self) -> bytes:
        return self.pid + self.X.encode() + be64(self.expiry) + self.ra_sig.encode()

    @classmethod
    def decode(cls, group: Group, data: bytes) -> "Certificate":
        if len(data) != certificate_len(group):
            raise InvalidElement("bad certificate length")
        n = group.element_len
        pid = data[:32]
        X = group.public_key(data[32:32 + n])
        expiry = int.from_bytes(data[32 + n:40 + n], "big")
        sig = Signature.decode(group, data[40 + n:])
        return cls(pid, X, expiry, sig)

    def verify(self, ra_public: GroupElement) -> bool:
        return schnorr_verify(ra_public, self.signed_message(self.pid, self.X, self.expiry), self.ra_sig)


def issue_certificate(params: SystemParams, pid: bytes, X: GroupElement, expiry: int) -> Certificate:
    msg = Certificate.signed_message(pid, X, expiry)
    k = derive_scalar(params.group, "k", params.secret_bytes, msg)
    return Certificate(pid, X, expiry, schnorr_sign(params.group, params.master_secret, msg, k))


@dataclass(frozen=True)
class TpdRecord:
    """Material installed in a vehicle at registration.

    ``params`` is the OBU's copy of the RA public parameters; the rest is
    the TPD content.  Nothing here reveals V or x without (ID, PW).
    """
    params: PublicParams
    pid: bytes
    A: bytes
    B: bytes
    x_masked: bytes
    cert: Certificate
    fuzzy: bool = False


def _pad(ID: bytes, PW: bytes) -> bytes:
    return hash_fields("mask", ID, PW)


def _verifier(ID: bytes, PW: bytes, V: bytes, fuzzy: bool) -> bytes:
    B = hash_fields("ver", ID, PW, V)
    # Fuzzy mode keeps B mod 2^8, so a stolen TPD leaves many candidate passwords.
    return B[-1:] if fuzzy else B


def vehicle_pid(params: SystemParams, ID: bytes) -> bytes:
    return hash_fields("pid", ID, params.secret_bytes)


def vehicle_secret(params: SystemParams, pid: bytes) -> bytes:
    """V for a pseudo-identity; only holders of the master secret can compute it."""
    return hash_fields("v", pid, params.secret_bytes)


def register_vehicle(params: SystemParams, ID: bytes, PW: bytes, expiry: int, *,
                     issued_at: int = 0, fuzzy: bool = False) -> TpdRecord:
    if not ID or not PW:
        raise EmptyCredential("identity and password must be non-empty")
    if expiry <= issued_at:
        raise ValueError("certificate expiry must lie after issue time")
    group = params.group
    pid = vehicle_pid(params, ID)
    V = vehicle_secret(params, pid)
    pad = _pad(ID, PW)
    x = derive_scalar(group, "sk", V)
    X = group.mul(group.generator, x)
    return TpdRecord(
        params=params.public,
        pid=pid,
        A=xor(V, pad),
        B=_verifier(ID, PW, V, fuzzy),
        x_masked=xor(group.scalar_bytes(x), pad),
        cert=issue_certificate(params, pid, X, expiry),
        fuzzy=fuzzy,
    )


@dataclass(frozen=True)
class RsuSecret:
    rsu_id: bytes
    k_infra: bytes = field(repr=False)


def rsu_id_of(rsu_id_raw: bytes) -> bytes:
    return hash_fields("rsu", rsu_id_raw)


def infra_key(params: SystemParams, rsu_id: bytes) -> bytes:
    return hash_fields("infra", rsu_id, params.secret_bytes)


def register_rsu(params: SystemParams, rsu_id_raw: bytes) -> RsuSecret:
    if not rsu_id_raw:
        raise EmptyCredential("RSU identifier must be non-empty")
    rsu_id = rsu_id_of(rsu_id_raw)
    return RsuSecret(rsu_id, infra_key(params, rsu_id))


def vc_id_of(vc_id_raw: bytes) -> bytes:
    return hash_fields("vc", vc_id_raw)


class RegistrationAuthority:
    """RA bookkeeping around the pure registration functions."""

    def __init__(self, params: SystemParams):
        self.params = params
        self.pids: dict[bytes, bytes] = {}
        self.revoked: set[bytes] = set()

    def register_vehicle(self, ID: bytes, PW: bytes, expiry: int, **kw) -> TpdRecord:
        tpd = register_vehicle(self.params, ID, PW, expiry, **kw)
        self.pids[ID] = tpd.pid
        return tpd

    def register_rsu(self, rsu_id_raw: bytes) -> RsuSecret:
        return register_rsu(self.params, rsu_id_raw)

    def revoke(self, ID: bytes) -> None:
        self.revoked.add(self.pids[ID])


@dataclass
class LoginState:
    """A vehicle after a successful login; acts as sender and receiver."""
    params: PublicParams
    pid: bytes
    V: bytes = field(repr=False)
    x: int = field(repr=False)
    cert: Certificate
    revoked: set[bytes] | frozenset[bytes] = frozenset()
    cert_cache: set[bytes] = field(default_factory=set, repr=False)
    active: bool = True

    role = "OBU"

    @property
    def node_id(self) -> bytes:
        return self.pid

    def logout(self) -> None:
        self.active = False

    def mac_key(self, channel: int, peer_id: bytes) -> bytes:
        if channel in (Channel.V2R, Channel.V2VC):
            return hash_fields("link", self.V, peer_id)
        raise BadAuthenticator(f"vehicle holds no key for channel {Channel(channel).name}")


def login(tpd: TpdRecord, ID: bytes, PW: bytes) -> LoginState:
    pad = _pad(ID, PW)
    V = xor(tpd.A, pad)
    if not hmac.compare_digest(_verifier(ID, PW, V, tpd.fuzzy), tpd.B):
        raise BadCredentials("identity or password incorrect")
    group = tpd.params.group
    x = int.from_bytes(xor(tpd.x_masked, pad), "big") % group.order
    return LoginState(tpd.params, tpd.pid, V, x, tpd.cert)
