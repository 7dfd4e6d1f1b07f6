"""Prime-order group backends and the scheme's hash suite.

Scalars are plain ints kept canonical in ``[0, q)``. Points are whatever the
backend uses natively (an int for the toy group, an affine tuple or ``None``
for P-256); treat them as opaque and go through the group for arithmetic.

Two backends are provided:

* ``toy``: the additive group of integers mod 101 with generator 1, so every
  value in the scheme can be recomputed by hand.
* ``production``: NIST P-256 with RFC 9380 hash-to-curve.

:class:`CountingGroup` wraps either backend and tallies operations, which is
how the overhead claims are measured.
"""
from __future__ import annotations

import hashlib
import secrets
from collections import Counter
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional, Tuple

from . import p256
from .errors import DecodeError, DivisionByZero, OverrideUnsupported

Point = Any
Scalar = int

TOY = "toy"
PRODUCTION = "production"
BACKENDS = (TOY, PRODUCTION)

HASH_IDS = ("H", "H1", "H2", "H3")
DOMAIN_TAGS = {
    "H": b"DCCSE/H",
    "H1": b"DCCSE/H1",
    "H2": b"DCCSE/H2",
    "H3": b"DCCSE/H3",
}


@dataclass(frozen=True)
class GroupDescriptor:
    backend_id: str
    q: int
    P: Point
    point_encoding_len: int
    scalar_encoding_len: int


def default_rng():
    return secrets.SystemRandom()


class Group:
    """Common scalar-field logic; subclasses supply the point arithmetic."""

    backend_id: str
    q: int
    generator: Point
    identity: Point
    point_len: int
    scalar_len: int
    digest_len: int

    @property
    def descriptor(self) -> GroupDescriptor:
        return GroupDescriptor(self.backend_id, self.q, self.generator,
                               self.point_len, self.scalar_len)

    def record(self, event: str) -> None:
        """Hook for operation counting; a no-op on plain backends."""

    # scalar field

    def sadd(self, x: Scalar, y: Scalar) -> Scalar:
        return (x + y) % self.q

    def ssub(self, x: Scalar, y: Scalar) -> Scalar:
        return (x - y) % self.q

    def smul(self, x: Scalar, y: Scalar) -> Scalar:
        return x * y % self.q

    def sneg(self, x: Scalar) -> Scalar:
        return -x % self.q

    def sinv(self, x: Scalar) -> Scalar:
        if x % self.q == 0:
            raise DivisionByZero("zero has no inverse mod q")
        return pow(x, -1, self.q)

    def random_scalar(self, rng=None, exclude=(0,)) -> Scalar:
        """Uniform scalar in [0, q) resampled until it avoids ``exclude``."""
        rng = rng or default_rng()
        while True:
            k = rng.randrange(self.q)
            if k not in exclude:
                return k

    # points

    def scalar_mul(self, k: Scalar, Q: Point) -> Point:
        raise NotImplementedError

    def base_mul(self, k: Scalar) -> Point:
        return self.scalar_mul(k, self.generator)

    def add(self, A: Point, B: Point) -> Point:
        raise NotImplementedError

    def neg(self, A: Point) -> Point:
        raise NotImplementedError

    def sub(self, A: Point, B: Point) -> Point:
        return self.add(A, self.neg(B))

    def is_identity(self, A: Point) -> bool:
        return A == self.identity

    def sum_points(self, points) -> Point:
        acc = self.identity
        for pt in points:
            acc = self.add(acc, pt)
        return acc

    # encodings

    def encode_scalar(self, x: Scalar) -> bytes:
        if not 0 <= x < self.q:
            raise ValueError("scalar not canonical")
        return x.to_bytes(self.scalar_len, "big")

    def decode_scalar(self, data: bytes) -> Scalar:
        if len(data) != self.scalar_len:
            raise DecodeError("scalar needs %d bytes, got %d" % (self.scalar_len, len(data)))
        x = int.from_bytes(data, "big")
        if x >= self.q:
            raise DecodeError("non-canonical scalar encoding")
        return x

    def encode_point(self, A: Point) -> bytes:
        raise NotImplementedError

    def decode_point(self, data: bytes) -> Point:
        raise NotImplementedError

    def encode_digest(self, d: bytes) -> bytes:
        if len(d) != self.digest_len:
            raise ValueError("digest must be %d bytes" % self.digest_len)
        return bytes(d)

    def decode_digest(self, data: bytes) -> bytes:
        if len(data) != self.digest_len:
            raise DecodeError("digest needs %d bytes, got %d" % (self.digest_len, len(data)))
        return bytes(data)

    # default hash instantiations, used when no override applies

    def default_hash(self, which: str, data: bytes):
        raise NotImplementedError

    def __eq__(self, other):
        return isinstance(other, Group) and self.descriptor == other.descriptor

    def __hash__(self):
        return hash(self.descriptor)

    def __repr__(self):
        return "%s(q=%d)" % (type(self).__name__, self.q)


class ToyGroup(Group):
    """Integers mod 101 under addition, generator 1.

    Scalar-times-point is integer multiplication mod 101. Discrete logs are
    trivial, which is the point: vectors can be checked on paper.
    """

    backend_id = TOY
    q = 101
    generator = 1
    identity = 0
    point_len = 2
    scalar_len = 1
    digest_len = 2

    def scalar_mul(self, k, Q):
        return k * Q % self.q

    def add(self, A, B):
        return (A + B) % self.q

    def neg(self, A):
        return -A % self.q

    def encode_point(self, A):
        return A.to_bytes(2, "big")

    def decode_point(self, data):
        if len(data) != 2:
            raise DecodeError("toy point needs 2 bytes, got %d" % len(data))
        v = int.from_bytes(data, "big")
        if v >= self.q:
            raise DecodeError("non-canonical toy point")
        return v

    def default_hash(self, which, data):
        v = int.from_bytes(data, "big")
        if which in ("H", "H2"):
            return v % (self.q - 1) + 1
        if which == "H1":
            return v % self.q or 1
        return self.encode_point(v % self.q)


class P256Group(Group):
    backend_id = PRODUCTION
    q = p256.n
    generator = p256.G
    identity = None
    point_len = 33
    scalar_len = 32
    digest_len = 32

    def scalar_mul(self, k, Q):
        return p256.mul(k, Q)

    def base_mul(self, k):
        return p256.base_mul(k)

    def add(self, A, B):
        return p256.add(A, B)

    def neg(self, A):
        return p256.neg(A)

    def encode_point(self, A):
        return p256.compress(A)

    def decode_point(self, data):
        try:
            return p256.decompress(bytes(data))
        except ValueError as exc:
            raise DecodeError(str(exc)) from None

    def _digest_to_scalar(self, tag: bytes, data: bytes) -> int:
        ctr = 0
        while True:
            h = hashlib.sha512(bytes([len(tag)]) + tag + ctr.to_bytes(4, "big") + data)
            v = int.from_bytes(h.digest(), "big") % self.q
            if v:
                return v
            ctr += 1

    def default_hash(self, which, data):
        tag = DOMAIN_TAGS[which]
        if which in ("H", "H2"):
            return self._digest_to_scalar(tag, data)
        if which == "H1":
            return p256.hash_to_curve(data, tag)
        return hashlib.sha256(bytes([len(tag)]) + tag + data).digest()


class CountingGroup(Group):
    """Delegating wrapper that counts every group-level operation.

    Counts live in ``self.counts`` (a :class:`collections.Counter`). The
    ``scalar_mul`` key covers both variable- and fixed-base multiplications.
    """

    def __init__(self, inner: Group):
        self.inner = inner
        self.counts: Counter = Counter()
        for attr in ("backend_id", "q", "generator", "identity",
                     "point_len", "scalar_len", "digest_len"):
            setattr(self, attr, getattr(inner, attr))

    def reset(self) -> None:
        self.counts.clear()

    def snapshot(self) -> Dict[str, int]:
        return dict(sorted(self.counts.items()))

    def record(self, event):
        self.counts[event] += 1

    def sadd(self, x, y):
        self.counts["scalar_add"] += 1
        return self.inner.sadd(x, y)

    def ssub(self, x, y):
        self.counts["scalar_sub"] += 1
        return self.inner.ssub(x, y)

    def smul(self, x, y):
        self.counts["scalar_field_mul"] += 1
        return self.inner.smul(x, y)

    def sneg(self, x):
        self.counts["scalar_neg"] += 1
        return self.inner.sneg(x)

    def sinv(self, x):
        self.counts["scalar_inv"] += 1
        return self.inner.sinv(x)

    def scalar_mul(self, k, Q):
        self.counts["scalar_mul"] += 1
        return self.inner.scalar_mul(k, Q)

    def base_mul(self, k):
        self.counts["scalar_mul"] += 1
        return self.inner.base_mul(k)

    def add(self, A, B):
        self.counts["point_add"] += 1
        return self.inner.add(A, B)

    def neg(self, A):
        self.counts["point_neg"] += 1
        return self.inner.neg(A)

    def sub(self, A, B):
        self.counts["point_sub"] += 1
        return self.inner.sub(A, B)

    def encode_point(self, A):
        return self.inner.encode_point(A)

    def decode_point(self, data):
        return self.inner.decode_point(data)

    def default_hash(self, which, data):
        return self.inner.default_hash(which, data)


def make_group(backend: str) -> Group:
    if backend == TOY:
        return ToyGroup()
    if backend == PRODUCTION:
        return P256Group()
    raise ValueError("unknown backend %r" % (backend,))


class HashSuite:
    """The four hash functions H, H1, H2, H3 bound to one group.

    ``H: bytes -> Z_q^*``, ``H1: bytes -> point``, ``H2: point -> Z_q^*`` and
    ``H3: point -> digest``. Overrides map ``(hash_id, input_bytes)`` to an
    output and are honored only on the toy backend; for ``H2`` and ``H3`` the
    input bytes are the encoded point.
    """

    def __init__(self, group: Group, overrides: Optional[Mapping[Tuple[str, bytes], Any]] = None):
        self.group = group
        self.overrides: Dict[Tuple[str, bytes], Any] = {}
        for key, value in (overrides or {}).items():
            self.set_override(key[0], key[1], value)

    def set_override(self, which: str, data: bytes, value) -> None:
        if self.group.backend_id != TOY:
            raise OverrideUnsupported("hash overrides exist only on the toy backend")
        if which not in HASH_IDS:
            raise ValueError("unknown hash id %r" % (which,))
        if which in ("H", "H2") and not 1 <= value < self.group.q:
            raise ValueError("%s override must lie in [1, q-1]" % which)
        self.overrides[(which, bytes(data))] = value

    def with_overrides(self, overrides) -> "HashSuite":
        merged = dict(self.overrides)
        merged.update(overrides)
        return HashSuite(self.group, merged)

    def _eval(self, which: str, data: bytes):
        self.group.record("hash_" + which)
        if self.overrides:
            hit = self.overrides.get((which, data))
            if hit is not None:
                return hit
        return self.group.default_hash(which, data)

    def H(self, m: bytes) -> Scalar:
        return self._eval("H", bytes(m))

    def H1(self, m: bytes) -> Point:
        return self._eval("H1", bytes(m))

    def H2(self, Q: Point) -> Scalar:
        return self._eval("H2", self.group.encode_point(Q))

    def H3(self, Q: Point) -> bytes:
        return self._eval("H3", self.group.encode_point(Q))


def hash_eval(suite: HashSuite, which: str, value):
    """Evaluate one of the suite's hashes by name.

    ``value`` is bytes for ``H``/``H1`` and a point for ``H2``/``H3``.
    """
    if which in ("H", "H1"):
        if not isinstance(value, (bytes, bytearray)):
            raise TypeError("%s takes bytes" % which)
        return getattr(suite, which)(value)
    if which in ("H2", "H3"):
        return getattr(suite, which)(value)
    raise ValueError("unknown hash id %r" % (which,))
