"""Designated-tester variant: trapdoors travel encrypted to one server.

A trapdoor is wrapped with a Diffie-Hellman encapsulation to the server's
public key ``D``: pick ``u``, send ``U = u P`` and encrypt the serialized
trapdoor under ``H3(u D)``. Only the holder of ``d`` recomputes ``d U`` and
can run Test. Wrapping costs two scalar multiplications and unwrapping one.

Production uses AES-256-GCM. The toy backend uses a SHA-256 keystream with an
HMAC tag over a 2-byte key; it is deterministic and not secure.
"""
from __future__ import annotations

import hashlib
import hmac
import struct
from dataclasses import dataclass

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from . import core
from .core import GlobalParams, KeywordCiphertext, Trapdoor
from .errors import AuthenticationFailure, DecodeError
from .group import TOY, Point, Scalar

TAG_LEN = 16
# Every key encrypts exactly one message (fresh u per wrap), so a fixed nonce is safe.
_NONCE = bytes(12)


@dataclass(frozen=True)
class ServerKeypair:
    d: Scalar
    D: Point


@dataclass(frozen=True)
class WrappedTrapdoor:
    U: Point
    ct: bytes
    tag: bytes


def server_keygen(gp: GlobalParams, rng=None) -> ServerKeypair:
    d = gp.group.random_scalar(rng)
    return ServerKeypair(d, gp.group.base_mul(d))


def _toy_keystream(key: bytes, length: int) -> bytes:
    out = bytearray()
    ctr = 0
    while len(out) < length:
        out += hashlib.sha256(b"DCCSE/toy-stream" + key + ctr.to_bytes(4, "big")).digest()
        ctr += 1
    return bytes(out[:length])


def _toy_tag(key: bytes, ad: bytes, ct: bytes) -> bytes:
    return hmac.new(key, b"DCCSE/toy-tag" + ad + ct, hashlib.sha256).digest()[:TAG_LEN]


def _seal(backend: str, key: bytes, ad: bytes, pt: bytes):
    if backend == TOY:
        ct = bytes(a ^ b for a, b in zip(pt, _toy_keystream(key, len(pt))))
        return ct, _toy_tag(key, ad, ct)
    sealed = AESGCM(key).encrypt(_NONCE, pt, ad)
    return sealed[:-TAG_LEN], sealed[-TAG_LEN:]


def _open(backend: str, key: bytes, ad: bytes, ct: bytes, tag: bytes) -> bytes:
    if backend == TOY:
        if not hmac.compare_digest(_toy_tag(key, ad, ct), tag):
            raise AuthenticationFailure("trapdoor tag mismatch")
        return bytes(a ^ b for a, b in zip(ct, _toy_keystream(key, len(ct))))
    try:
        return AESGCM(key).decrypt(_NONCE, ct + tag, ad)
    except InvalidTag:
        raise AuthenticationFailure("trapdoor tag mismatch") from None


def wrap_trapdoor(gp: GlobalParams, t: Trapdoor, D: Point, rng=None, u: Scalar = None) -> WrappedTrapdoor:
    """Encrypt ``t`` to the server key ``D``; ``u`` may be pinned for vectors."""
    G = gp.group
    if u is None:
        u = G.random_scalar(rng)
    U = G.base_mul(u)
    key = gp.suite.H3(G.scalar_mul(u, D))
    ct, tag = _seal(G.backend_id, key, G.encode_point(U), core.encode_trapdoor(G, t))
    return WrappedTrapdoor(U, ct, tag)


def unwrap_trapdoor(gp: GlobalParams, wt: WrappedTrapdoor, d: Scalar) -> Trapdoor:
    G = gp.group
    key = gp.suite.H3(G.scalar_mul(d, wt.U))
    pt = _open(G.backend_id, key, G.encode_point(wt.U), wt.ct, wt.tag)
    return core.decode_trapdoor(G, pt)


def designated_test(gp: GlobalParams, c: KeywordCiphertext, wt: WrappedTrapdoor,
                    server: ServerKeypair) -> bool:
    return core.test(gp, c, unwrap_trapdoor(gp, wt, server.d))


designated_test.__test__ = False


def encode_wrapped(gp: GlobalParams, wt: WrappedTrapdoor) -> bytes:
    """``U || len(ct) (4 bytes) || ct || tag``."""
    return gp.group.encode_point(wt.U) + struct.pack(">I", len(wt.ct)) + wt.ct + wt.tag


def decode_wrapped(gp: GlobalParams, data: bytes) -> WrappedTrapdoor:
    G = gp.group
    plen = G.point_len
    if len(data) < plen + 4 + TAG_LEN:
        raise DecodeError("wrapped trapdoor too short")
    U = G.decode_point(data[:plen])
    (ln,) = struct.unpack_from(">I", data, plen)
    if len(data) != plen + 4 + ln + TAG_LEN:
        raise DecodeError("wrapped trapdoor length mismatch")
    ct = bytes(data[plen + 4:plen + 4 + ln])
    return WrappedTrapdoor(U, ct, bytes(data[plen + 4 + ln:]))
