"""Pure-Python NIST P-256 arithmetic and RFC 9380 hash-to-curve.

Points are affine ``(x, y)`` tuples of ints, with ``None`` for the point at
infinity. Internally scalar multiplication runs in Jacobian coordinates.
Nothing here is constant time.
"""
from __future__ import annotations

import hashlib
from typing import Optional, Tuple

Affine = Optional[Tuple[int, int]]

p = 0xFFFFFFFF00000001000000000000000000000000FFFFFFFFFFFFFFFFFFFFFFFF
n = 0xFFFFFFFF00000000FFFFFFFFFFFFFFFFBCE6FAADA7179E84F3B9CAC2FC632551
a = p - 3
b = 0x5AC635D8AA3A93E7B3EBBD55769886BC651D06B0CC53B0F63BCE3C3E27D2604B
Gx = 0x6B17D1F2E12C4247F8BCE6E563A440F277037D812DEB33A0F4A13945D898C296
Gy = 0x4FE342E2FE1A7F9B8EE7EB4A7C0F9E162BCE33576B315ECECBB6406837BF51F5
G = (Gx, Gy)

_SQRT_EXP = (p + 1) // 4  # p = 3 mod 4
_WINDOW = 4


def is_on_curve(pt: Affine) -> bool:
    if pt is None:
        return True
    x, y = pt
    return 0 <= x < p and 0 <= y < p and (y * y - x * x * x - a * x - b) % p == 0


def sqrt(v: int) -> Optional[int]:
    """Square root mod p, or None when ``v`` is a non-residue."""
    r = pow(v, _SQRT_EXP, p)
    return r if r * r % p == v % p else None


# Jacobian (X, Y, Z) with x = X/Z^2, y = Y/Z^3; Z == 0 encodes infinity.
_INF = (1, 1, 0)


def _to_jac(pt: Affine):
    if pt is None:
        return _INF
    return (pt[0], pt[1], 1)


def _to_affine(P) -> Affine:
    X, Y, Z = P
    if Z == 0:
        return None
    zi = pow(Z, -1, p)
    zi2 = zi * zi % p
    return (X * zi2 % p, Y * zi2 * zi % p)


def _double(P):
    X1, Y1, Z1 = P
    if Z1 == 0 or Y1 == 0:
        return _INF
    # dbl-2001-b, a = -3
    delta = Z1 * Z1 % p
    gamma = Y1 * Y1 % p
    beta = X1 * gamma % p
    alpha = 3 * (X1 - delta) * (X1 + delta) % p
    X3 = (alpha * alpha - 8 * beta) % p
    Z3 = ((Y1 + Z1) ** 2 - gamma - delta) % p
    Y3 = (alpha * (4 * beta - X3) - 8 * gamma * gamma) % p
    return (X3, Y3, Z3)


def _add(P, Q):
    X1, Y1, Z1 = P
    X2, Y2, Z2 = Q
    if Z1 == 0:
        return Q
    if Z2 == 0:
        return P
    Z1Z1 = Z1 * Z1 % p
    Z2Z2 = Z2 * Z2 % p
    U1 = X1 * Z2Z2 % p
    U2 = X2 * Z1Z1 % p
    S1 = Y1 * Z2 * Z2Z2 % p
    S2 = Y2 * Z1 * Z1Z1 % p
    H = (U2 - U1) % p
    R = (S2 - S1) % p
    if H == 0:
        return _double(P) if R == 0 else _INF
    HH = H * H % p
    HHH = H * HH % p
    V = U1 * HH % p
    X3 = (R * R - HHH - 2 * V) % p
    Y3 = (R * (V - X3) - S1 * HHH) % p
    Z3 = Z1 * Z2 * H % p
    return (X3, Y3, Z3)


def _add_mixed(P, x2: int, y2: int):
    """P (Jacobian) + (x2, y2) (affine, finite)."""
    X1, Y1, Z1 = P
    if Z1 == 0:
        return (x2, y2, 1)
    Z1Z1 = Z1 * Z1 % p
    U2 = x2 * Z1Z1 % p
    S2 = y2 * Z1 * Z1Z1 % p
    H = (U2 - X1) % p
    R = (S2 - Y1) % p
    if H == 0:
        return _double(P) if R == 0 else _INF
    HH = H * H % p
    HHH = H * HH % p
    V = X1 * HH % p
    X3 = (R * R - HHH - 2 * V) % p
    Y3 = (R * (V - X3) - Y1 * HHH) % p
    Z3 = Z1 * H % p
    return (X3, Y3, Z3)


def add(P: Affine, Q: Affine) -> Affine:
    if P is None:
        return Q
    if Q is None:
        return P
    return _to_affine(_add_mixed(_to_jac(P), Q[0], Q[1]))


def neg(P: Affine) -> Affine:
    if P is None:
        return None
    return (P[0], (-P[1]) % p)


def _batch_affine(points):
    """Normalize Jacobian points to affine with a single inversion."""
    prefix = []
    acc = 1
    for X, Y, Z in points:
        prefix.append(acc)
        acc = acc * Z % p
    inv = pow(acc, -1, p)
    out = [None] * len(points)
    for idx in range(len(points) - 1, -1, -1):
        X, Y, Z = points[idx]
        zi = inv * prefix[idx] % p
        inv = inv * Z % p
        zi2 = zi * zi % p
        out[idx] = (X * zi2 % p, Y * zi2 * zi % p)
    return out


def _build_base_table():
    # table[w][d-1] = d * 16^w * G for d in 1..15
    rows = []
    base = _to_jac(G)
    for _ in range(64):
        row = [base]
        for _ in range(14):
            row.append(_add(row[-1], base))
        rows.append(row)
        nxt = row[-1]  # 15 * base
        base = _add(nxt, base)
    flat = _batch_affine([pt for row in rows for pt in row])
    return [flat[i * 15:(i + 1) * 15] for i in range(64)]


_BASE_TABLE = None


def base_mul(k: int) -> Affine:
    """k * G using a precomputed fixed-base window table."""
    global _BASE_TABLE
    if _BASE_TABLE is None:
        _BASE_TABLE = _build_base_table()
    k %= n
    acc = _INF
    w = 0
    while k:
        d = k & 15
        if d:
            x, y = _BASE_TABLE[w][d - 1]
            acc = _add_mixed(acc, x, y)
        k >>= 4
        w += 1
    return _to_affine(acc)


def mul(k: int, P: Affine) -> Affine:
    """k * P with a left-to-right fixed 4-bit window."""
    k %= n
    if k == 0 or P is None:
        return None
    if P == G:
        return base_mul(k)
    J = _to_jac(P)
    tbl = [J]
    for _ in range(14):
        tbl.append(_add(tbl[-1], J))
    tbl = _batch_affine(tbl)
    acc = _INF
    for shift in range((k.bit_length() + 3) // 4 * 4 - 4, -4, -4):
        if acc[2]:
            acc = _double(_double(_double(_double(acc))))
        d = (k >> shift) & 15
        if d:
            x, y = tbl[d - 1]
            acc = _add_mixed(acc, x, y)
    return _to_affine(acc)


def compress(P: Affine) -> bytes:
    """SEC1 compressed encoding; infinity is 33 zero bytes."""
    if P is None:
        return bytes(33)
    return bytes([2 | (P[1] & 1)]) + P[0].to_bytes(32, "big")


def decompress(data: bytes) -> Affine:
    if len(data) != 33:
        raise ValueError("expected 33 bytes, got %d" % len(data))
    if data == bytes(33):
        return None
    prefix = data[0]
    if prefix not in (2, 3):
        raise ValueError("bad point prefix 0x%02x" % prefix)
    x = int.from_bytes(data[1:], "big")
    if x >= p:
        raise ValueError("x coordinate not reduced")
    y = sqrt((x * x * x + a * x + b) % p)
    if y is None:
        raise ValueError("x is not on the curve")
    if (y & 1) != (prefix & 1):
        y = p - y
    return (x, y)


# --- RFC 9380, P256_XMD:SHA-256_SSWU_RO_ ---

_SSWU_Z = p - 10
_L = 48


def expand_message_xmd(msg: bytes, dst: bytes, len_in_bytes: int) -> bytes:
    b_in_bytes = 32
    r_in_bytes = 64
    ell = -(-len_in_bytes // b_in_bytes)
    if ell > 255 or len(dst) > 255:
        raise ValueError("expand_message_xmd: parameters out of range")
    dst_prime = dst + bytes([len(dst)])
    b0 = hashlib.sha256(
        bytes(r_in_bytes) + msg + len_in_bytes.to_bytes(2, "big") + b"\x00" + dst_prime
    ).digest()
    bi = hashlib.sha256(b0 + b"\x01" + dst_prime).digest()
    out = [bi]
    for i in range(2, ell + 1):
        bi = hashlib.sha256(bytes(x ^ y for x, y in zip(b0, bi)) + bytes([i]) + dst_prime).digest()
        out.append(bi)
    return b"".join(out)[:len_in_bytes]


def hash_to_field(msg: bytes, count: int, dst: bytes, modulus: int = p):
    raw = expand_message_xmd(msg, dst, count * _L)
    return [int.from_bytes(raw[i * _L:(i + 1) * _L], "big") % modulus for i in range(count)]


def map_to_curve_sswu(u: int) -> Tuple[int, int]:
    zu2 = _SSWU_Z * u * u % p
    tv1 = (zu2 * zu2 + zu2) % p
    if tv1 == 0:
        x1 = b * pow(_SSWU_Z * a, -1, p) % p
    else:
        x1 = (-b) * pow(a, -1, p) * (1 + pow(tv1, -1, p)) % p
    gx1 = (x1 * x1 * x1 + a * x1 + b) % p
    y = sqrt(gx1)
    if y is not None:
        x = x1
    else:
        x = zu2 * x1 % p
        y = sqrt((x * x * x + a * x + b) % p)
    if (u & 1) != (y & 1):
        y = p - y
    return (x, y)


def hash_to_curve(msg: bytes, dst: bytes) -> Affine:
    u0, u1 = hash_to_field(msg, 2, dst)
    # cofactor is 1
    return add(map_to_curve_sswu(u0), map_to_curve_sswu(u1))
