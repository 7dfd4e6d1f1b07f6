"""Hand-checkable toy vector and random scheme instances.

The toy vector lives in the integers mod 101. Its hash outputs are pinned
through overrides so every value can be recomputed on paper:

    H1(tau) = 3, s = 4          ->  sigma_u = 12, eta = H2(12) = 13
    x = 3                       ->  X = 3, eta * X = 39
    H2(39) = 2 (beta), H(w0) = 11, H(w1) = 12
    y_i = 5, r = 7, h = 3, I = (1,)

    C1 = 7 * 2^-1 = 54     C2 = 3 * 2^-1 = 52     C3 = 7     C5 = 35
    T1 = 0                 T2(w0) = 4^-1 * 2 * 11 = 56      T2(w1) = 6
    inner point: 84 * 28 = 29 for w0, 9 * 28 = 50 for w1
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

from . import core
from .group import TOY

TOY_TAU = b"\x00" * 31 + b"\x03"
TOY_W0 = b"w0"
TOY_W1 = b"w1"

TOY_EXPECTED = {
    "sigma_u": 12, "eta": 13, "beta": 2,
    "C1": 54, "C2": 52, "C3": 7, "C5": 35, "C6": b"\x00\x1d",
    "T1": 0, "T2_w0": 56, "T2_w1": 6,
    "inner_w0": 29, "inner_w1": 50,
}


def toy_params(counting: bool = False) -> core.GlobalParams:
    gp = core.setup(TOY, counting=counting)
    eta_x = gp.group.encode_point(39)
    overrides = {
        ("H1", TOY_TAU): 3,
        ("H2", eta_x): 2,
        ("H", TOY_W0): 11,
        ("H", TOY_W1): 12,
    }
    return core.GlobalParams(gp.group, gp.suite.with_overrides(overrides))


@dataclass(frozen=True)
class ToyVector:
    gp: core.GlobalParams
    partial_key: core.PartialKey
    X: int
    receiver: core.ReceiverKeypair
    I: Tuple[int, ...]
    Ys: Tuple[int, ...]
    ciphertext: core.KeywordCiphertext
    trapdoor_w0: core.Trapdoor
    trapdoor_w1: core.Trapdoor


def toy_vector(counting: bool = False) -> ToyVector:
    gp = toy_params(counting)
    token = core.EpochToken(1, TOY_TAU)
    committee = core.CommitteeKey(4, gp.group.base_mul(4))
    pk = core.partial_key_request(gp, token, committee)
    X = gp.group.base_mul(3)
    receiver = core.receiver_from_secret(gp, 5, index=1)
    I, Ys = (1,), (receiver.Y,)
    c = core.const_enc_keyword_with_nonces(gp, X, I, Ys, pk.eta, TOY_W0, r=7, h=3)
    t0 = core.trapdoor(gp, X, receiver, I, Ys, pk.eta, TOY_W0)
    t1 = core.trapdoor(gp, X, receiver, I, Ys, pk.eta, TOY_W1)
    return ToyVector(gp, pk, X, receiver, I, Ys, c, t0, t1)


def toy_vector_checks() -> list:
    v = toy_vector()
    c, t0, t1 = v.ciphertext, v.trapdoor_w0, v.trapdoor_w1
    observed = {
        "sigma_u": v.partial_key.sigma_u, "eta": v.partial_key.eta,
        "beta": v.gp.suite.H2(v.gp.group.scalar_mul(v.partial_key.eta, v.X)),
        "C1": c.C1, "C2": c.C2, "C3": c.C3, "C5": c.C5, "C6": c.C6,
        "T1": t0.T1, "T2_w0": t0.T2, "T2_w1": t1.T2,
        "inner_w0": core.test_inner_point(v.gp, c, t0),
        "inner_w1": core.test_inner_point(v.gp, c, t1),
    }
    checks = []
    for name, want in TOY_EXPECTED.items():
        got = observed[name]
        checks.append({"name": "toy_vector." + name, "passed": got == want,
                       "detail": {"expected": _show(want), "observed": _show(got)}})
    checks.append({"name": "toy_vector.verdict_w0", "passed": core.test(v.gp, c, t0) is True})
    checks.append({"name": "toy_vector.verdict_w1", "passed": core.test(v.gp, c, t1) is False})
    return checks


def _show(v):
    return v.hex() if isinstance(v, bytes) else v


@dataclass(frozen=True)
class Instance:
    """A sender, a receiver set and the shared eta, all randomly drawn."""
    X: object
    receivers: Tuple[core.ReceiverKeypair, ...]
    eta: int

    @property
    def I(self):
        return tuple(r.index for r in self.receivers)

    @property
    def Ys(self):
        return tuple(r.Y for r in self.receivers)


def random_instance(gp: core.GlobalParams, rng, n_receivers: int) -> Instance:
    X = core.sender_keygen(gp, rng).X
    receivers = tuple(core.receiver_keygen(gp, rng, index=i + 1) for i in range(n_receivers))
    eta = gp.group.random_scalar(rng)
    return Instance(X, receivers, eta)


def random_keyword(rng, max_len: int = 64) -> bytes:
    n = rng.randint(1, max_len)
    return rng.getrandbits(8 * n).to_bytes(n, "big")
