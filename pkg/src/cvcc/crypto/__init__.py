from .cipher import CipherText, stream_decrypt, stream_encrypt
from .group import P256, TOY, Group, GroupElement, get_group, scalar_mul
from .instrument import OP_KINDS, listening
from .primitives import DIGEST_LEN, be16, be64, canon, hash, hash_fields, uncanon, xor
from .schnorr import Signature, batch_verify, schnorr_sign, schnorr_verify, signature_len

__all__ = [
    "CipherText", "DIGEST_LEN", "Group", "GroupElement", "OP_KINDS", "P256", "Signature", "TOY",
    "batch_verify", "be16", "be64", "canon", "get_group", "hash", "hash_fields", "listening",
    "scalar_mul", "schnorr_sign", "schnorr_verify", "signature_len", "stream_decrypt",
    "stream_encrypt", "uncanon", "xor",
]
