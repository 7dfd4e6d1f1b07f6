"""Keyword-search core of DCC-SE.

Registration (epoch token from the CA, partial key from the committee),
keyword encryption, trapdoor generation and the Test predicate.

The algebra, with ``beta = H2(eta * X)``::

    C1 = r / beta      C2 = h / beta      C3 = r P
    C5 = r * sum(Y_j for j in I)          C6 = H3(r h H(w) P)
    T1 = beta * sum(Y_j for j in I if j != i)
    T2 = beta H(w) / (y_i - 1)

and Test accepts when ``H3((T2 C2) * ((C5 - C1 T1) - C3)) == C6``. Because
``C5 - C1 T1 = r Y_i``, the inner point collapses to ``r h H(w) P`` exactly
when the keywords agree.

Note that encryption needs only public keys and ``eta``, and every enrolled
user gets the same ``eta`` for an epoch. That is the weakness the game module
exploits.
"""
from __future__ import annotations

import hmac
import struct
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .errors import (DecodeError, DegenerateReceiverKey, DuplicateReceiver,
                     EmptyReceiverSet, InvalidBlind, ReceiverNotInSet,
                     ReceiverSetMismatch)
from .group import (BACKENDS, CountingGroup, Group, HashSuite, Point, Scalar,
                    default_rng, make_group)

TOKEN_LEN = 32


@dataclass(frozen=True)
class GlobalParams:
    group: Group
    suite: HashSuite

    def __post_init__(self):
        if self.suite.group is not self.group:
            raise ValueError("hash suite is bound to a different group")


def setup(backend: str, overrides=None, counting: bool = False) -> GlobalParams:
    """Build global parameters for ``backend`` ("toy" or "production").

    ``counting=True`` wraps the group in a :class:`CountingGroup`.
    """
    if backend not in BACKENDS:
        raise ValueError("unknown backend %r" % (backend,))
    group = make_group(backend)
    if counting:
        group = CountingGroup(group)
    return GlobalParams(group, HashSuite(group, overrides))


# --- registration ---------------------------------------------------------

@dataclass(frozen=True)
class EpochToken:
    epoch_id: int
    tau: bytes


def issue_epoch_token(epoch_id: int, rng=None) -> EpochToken:
    """Draw a fresh 32-byte token for ``epoch_id``."""
    rng = rng or default_rng()
    return EpochToken(epoch_id, rng.getrandbits(8 * TOKEN_LEN).to_bytes(TOKEN_LEN, "big"))


class CertificateAuthority:
    """Hands every enrolling user the single token of the current epoch."""

    def __init__(self, rng=None):
        self.rng = rng or default_rng()
        self._tokens: Dict[int, EpochToken] = {}
        self.enrolled: Dict[int, List[str]] = {}

    def token_for(self, epoch_id: int) -> EpochToken:
        if epoch_id not in self._tokens:
            self._tokens[epoch_id] = issue_epoch_token(epoch_id, self.rng)
        return self._tokens[epoch_id]

    def enroll(self, user_id: str, epoch_id: int) -> EpochToken:
        self.enrolled.setdefault(epoch_id, []).append(user_id)
        return self.token_for(epoch_id)


@dataclass(frozen=True)
class CommitteeKey:
    s: Scalar
    S: Point


@dataclass(frozen=True)
class PartialKey:
    sigma_u: Point
    eta: Scalar


def committee_keygen(gp: GlobalParams, rng=None) -> CommitteeKey:
    s = gp.group.random_scalar(rng)
    return CommitteeKey(s, gp.group.base_mul(s))


def partial_key_from_signature(gp: GlobalParams, sigma_u: Point) -> PartialKey:
    return PartialKey(sigma_u, gp.suite.H2(sigma_u))


def partial_key_request(gp: GlobalParams, token: EpochToken, committee: CommitteeKey) -> PartialKey:
    """Direct issuance: ``sigma_u = s H1(tau)`` and ``eta = H2(sigma_u)``."""
    sigma_u = gp.group.scalar_mul(committee.s, gp.suite.H1(token.tau))
    return partial_key_from_signature(gp, sigma_u)


def blind_request(gp: GlobalParams, token: EpochToken, blind: Scalar) -> Point:
    """Blind ``H1(tau)`` additively: ``M' = H1(tau) + k P``."""
    if blind % gp.group.q == 0:
        raise InvalidBlind("blinding factor must be nonzero")
    return gp.group.add(gp.suite.H1(token.tau), gp.group.base_mul(blind))


def blind_sign(gp: GlobalParams, blinded: Point, committee: CommitteeKey) -> Point:
    return gp.group.scalar_mul(committee.s, blinded)


def unblind(gp: GlobalParams, signed: Point, blind: Scalar, committee_public: Point) -> Point:
    """Strip the blind: ``sigma_u = sigma' - k S``."""
    if blind % gp.group.q == 0:
        raise InvalidBlind("blinding factor must be nonzero")
    return gp.group.sub(signed, gp.group.scalar_mul(blind, committee_public))


def blind_partial_key_request(gp: GlobalParams, token: EpochToken, committee: CommitteeKey,
                              rng=None) -> PartialKey:
    """Full blinded round trip, user side and committee side."""
    k = gp.group.random_scalar(rng)
    signed = blind_sign(gp, blind_request(gp, token, k), committee)
    return partial_key_from_signature(gp, unblind(gp, signed, k, committee.S))


class Committee:
    """Committee nodes holding ``s``; they answer partial-key requests."""

    def __init__(self, gp: GlobalParams, key: CommitteeKey):
        self.gp = gp
        self.key = key
        self.requests = 0

    @property
    def public(self) -> Point:
        return self.key.S

    def partial_key(self, token: EpochToken) -> PartialKey:
        self.requests += 1
        return partial_key_request(self.gp, token, self.key)

    def sign_blinded(self, blinded: Point) -> Point:
        self.requests += 1
        return blind_sign(self.gp, blinded, self.key)


# --- keys ------------------------------------------------------------------

@dataclass(frozen=True)
class SenderKeypair:
    x: Scalar
    X: Point


@dataclass(frozen=True)
class ReceiverKeypair:
    y: Scalar
    Y: Point
    index: int


def sender_keygen(gp: GlobalParams, rng=None) -> SenderKeypair:
    x = gp.group.random_scalar(rng)
    return SenderKeypair(x, gp.group.base_mul(x))


def receiver_keygen(gp: GlobalParams, rng=None, index: int = 0) -> ReceiverKeypair:
    # y = 1 would make (y - 1)^-1 undefined in the trapdoor
    y = gp.group.random_scalar(rng, exclude=(0, 1))
    return ReceiverKeypair(y, gp.group.base_mul(y), index)


def receiver_from_secret(gp: GlobalParams, y: Scalar, index: int) -> ReceiverKeypair:
    if y % gp.group.q in (0, 1):
        raise DegenerateReceiverKey("receiver secret must avoid 0 and 1")
    return ReceiverKeypair(y, gp.group.base_mul(y), index)


# --- ciphertexts and trapdoors -------------------------------------------

@dataclass(frozen=True)
class KeywordCiphertext:
    C1: Scalar
    C2: Scalar
    C3: Point
    C5: Point
    C6: bytes
    receiver_set: Tuple[int, ...]


@dataclass(frozen=True)
class Trapdoor:
    T1: Point
    T2: Scalar
    receiver_set: Tuple[int, ...]
    target_index: int


def _check_receivers(I: Sequence[int], Ys: Sequence[Point]) -> Tuple[int, ...]:
    I = tuple(I)
    if not I:
        raise EmptyReceiverSet("receiver set is empty")
    if len(set(I)) != len(I):
        raise DuplicateReceiver("receiver set has duplicate ids")
    if len(Ys) != len(I):
        raise ValueError("need one public key per receiver id")
    return I


def _beta(gp: GlobalParams, eta: Scalar, X: Point) -> Scalar:
    if eta % gp.group.q == 0:
        raise ValueError("eta must be nonzero")
    return gp.suite.H2(gp.group.scalar_mul(eta, X))


def const_enc_keyword(gp: GlobalParams, X: Point, I: Sequence[int], Ys: Sequence[Point],
                      eta: Scalar, w: bytes, rng=None) -> KeywordCiphertext:
    """Encrypt keyword ``w`` for receiver set ``I`` with fresh ``r, h``."""
    _check_receivers(I, Ys)
    r = gp.group.random_scalar(rng)
    h = gp.group.random_scalar(rng)
    return const_enc_keyword_with_nonces(gp, X, I, Ys, eta, w, r, h)


def const_enc_keyword_with_nonces(gp: GlobalParams, X: Point, I: Sequence[int],
                                  Ys: Sequence[Point], eta: Scalar, w: bytes,
                                  r: Scalar, h: Scalar) -> KeywordCiphertext:
    """Deterministic encryption with caller-chosen nonces ``r, h`` (both nonzero)."""
    G = gp.group
    I = _check_receivers(I, Ys)
    if r % G.q == 0 or h % G.q == 0:
        raise ValueError("r and h must be nonzero")
    beta_inv = G.sinv(_beta(gp, eta, X))
    C1 = G.smul(r, beta_inv)
    C2 = G.smul(h, beta_inv)
    C3 = G.base_mul(r)
    # sum_j r Y_j computed as r * sum_j Y_j
    C5 = G.scalar_mul(r, G.sum_points(Ys))
    C6 = gp.suite.H3(G.base_mul(G.smul(G.smul(r, h), gp.suite.H(w))))
    return KeywordCiphertext(C1, C2, C3, C5, C6, I)


def trapdoor(gp: GlobalParams, X: Point, receiver: ReceiverKeypair, I: Sequence[int],
             Ys: Sequence[Point], eta: Scalar, w: bytes) -> Trapdoor:
    """Deterministic search token for ``w`` issued by ``receiver``."""
    G = gp.group
    I = _check_receivers(I, Ys)
    if receiver.index not in I:
        raise ReceiverNotInSet("receiver %d not in %r" % (receiver.index, I))
    if receiver.y % G.q == 1:
        raise DegenerateReceiverKey("y_i = 1 has no (y_i - 1)^-1")
    pos = I.index(receiver.index)
    if Ys[pos] != receiver.Y:
        raise ValueError("public key at receiver position does not match receiver")
    beta = _beta(gp, eta, X)
    others = G.sum_points(Y for j, Y in enumerate(Ys) if j != pos)
    T1 = G.scalar_mul(beta, others)
    T2 = G.smul(G.smul(G.sinv(G.ssub(receiver.y, 1)), beta), gp.suite.H(w))
    return Trapdoor(T1, T2, I, receiver.index)


def test_inner_point(gp: GlobalParams, c: KeywordCiphertext, t: Trapdoor) -> Point:
    """The point Test hashes: ``(T2 C2) * ((C5 - C1 T1) - C3)``."""
    if tuple(c.receiver_set) != tuple(t.receiver_set):
        raise ReceiverSetMismatch("ciphertext and trapdoor receiver sets differ")
    G = gp.group
    Q = G.sub(G.sub(c.C5, G.scalar_mul(c.C1, t.T1)), c.C3)
    return G.scalar_mul(G.smul(t.T2, c.C2), Q)


def test(gp: GlobalParams, c: KeywordCiphertext, t: Trapdoor) -> bool:
    """True iff ``c`` and ``t`` carry the same keyword (up to hash collisions)."""
    return hmac.compare_digest(gp.suite.H3(test_inner_point(gp, c, t)), c.C6)


# Keep pytest from collecting the predicate when it is imported into a test module.
test.__test__ = False
test_inner_point.__test__ = False


# --- canonical serialization ----------------------------------------------
# Each field is a 4-byte big-endian length followed by its encoding; receiver
# ids are concatenated 4-byte big-endian integers.

def _pack(*fields: bytes) -> bytes:
    return b"".join(struct.pack(">I", len(f)) + f for f in fields)


def _unpack(data: bytes, count: int) -> List[bytes]:
    out, off = [], 0
    for _ in range(count):
        if off + 4 > len(data):
            raise DecodeError("truncated length prefix")
        (ln,) = struct.unpack_from(">I", data, off)
        off += 4
        if off + ln > len(data):
            raise DecodeError("truncated field")
        out.append(bytes(data[off:off + ln]))
        off += ln
    if off != len(data):
        raise DecodeError("trailing bytes")
    return out


def _pack_ids(ids: Sequence[int]) -> bytes:
    return b"".join(struct.pack(">I", i) for i in ids)


def _unpack_ids(data: bytes) -> Tuple[int, ...]:
    if len(data) % 4:
        raise DecodeError("receiver id list not a multiple of 4 bytes")
    return tuple(struct.unpack(">%dI" % (len(data) // 4), data))


def encode_ciphertext(group: Group, c: KeywordCiphertext) -> bytes:
    return _pack(group.encode_scalar(c.C1), group.encode_scalar(c.C2),
                 group.encode_point(c.C3), group.encode_point(c.C5),
                 group.encode_digest(c.C6), _pack_ids(c.receiver_set))


def decode_ciphertext(group: Group, data: bytes) -> KeywordCiphertext:
    c1, c2, c3, c5, c6, ids = _unpack(data, 6)
    return KeywordCiphertext(group.decode_scalar(c1), group.decode_scalar(c2),
                             group.decode_point(c3), group.decode_point(c5),
                             group.decode_digest(c6), _unpack_ids(ids))


def encode_trapdoor(group: Group, t: Trapdoor) -> bytes:
    return _pack(group.encode_point(t.T1), group.encode_scalar(t.T2),
                 _pack_ids(t.receiver_set), struct.pack(">I", t.target_index))


def decode_trapdoor(group: Group, data: bytes) -> Trapdoor:
    t1, t2, ids, idx = _unpack(data, 4)
    if len(idx) != 4:
        raise DecodeError("target index must be 4 bytes")
    return Trapdoor(group.decode_point(t1), group.decode_scalar(t2),
                    _unpack_ids(ids), struct.unpack(">I", idx)[0])
