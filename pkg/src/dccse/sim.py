"""Multi-role protocol simulation over an in-process message bus.

Roles: the CA, the committee, enrolled users (user 0 is the data sender,
the last user is the adversary when enabled, the rest are receivers), and
the search server (the cloud, or the designated server when patched).

Ciphertexts and trapdoors travel over public legs to the server. A tap on
those legs feeds the adversary's mailbox; every other leg is private.
"""
from __future__ import annotations

import hashlib
import random
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Any, Deque, Dict, List, Tuple

from . import core, dtester
from .dtester import WrappedTrapdoor
from .errors import CannotTest, UsageError
from .game import SetupView, attack_adversary
from .group import BACKENDS, PRODUCTION

DEFAULT_KEYWORDS = (b"invoice", b"salary", b"diagnosis", b"merger")


@dataclass(frozen=True)
class SimScript:
    epochs: int = 2
    users: int = 5
    receivers: int = 2
    keywords: Tuple[bytes, ...] = DEFAULT_KEYWORDS
    adversary: bool = False
    patched: bool = False
    blind_issuance: bool = False
    seed: int = 0
    backend: str = PRODUCTION

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise UsageError("unknown backend %r" % (self.backend,))
        if self.epochs < 1:
            raise UsageError("need at least one epoch")
        if self.receivers < 1:
            raise UsageError("need at least one receiver per document")
        if not self.keywords:
            raise UsageError("keyword universe is empty")
        if len(set(self.keywords)) != len(self.keywords):
            raise UsageError("keyword universe has duplicates")
        # the sender and (optionally) the adversary are not receivers
        needed = self.receivers + 1 + int(self.adversary)
        if self.users < needed:
            raise UsageError("need users >= receivers + 1%s (got %d users, %d receivers)"
                             % (" + 1 adversary" if self.adversary else "",
                                self.users, self.receivers))


@dataclass(frozen=True)
class Message:
    epoch: int
    src: str
    dst: str
    kind: str
    payload: Any
    public: bool = False


class MessageBus:
    """Role mailboxes with an optional tap on public legs."""

    def __init__(self):
        self.mailboxes: Dict[str, Deque[Message]] = defaultdict(deque)
        self.taps: List[str] = []
        self.log: List[Tuple[str, Message]] = []

    def tap_public(self, role: str) -> None:
        self.taps.append(role)

    def send(self, msg: Message) -> None:
        self.mailboxes[msg.dst].append(msg)
        self.log.append((msg.dst, msg))
        if msg.public:
            for role in self.taps:
                self.mailboxes[role].append(msg)
                self.log.append((role, msg))

    def drain(self, role: str, kind: str = None) -> List[Message]:
        box = self.mailboxes[role]
        if kind is None:
            out = list(box)
            box.clear()
            return out
        out = [m for m in box if m.kind == kind]
        self.mailboxes[role] = deque(m for m in box if m.kind != kind)
        return out


def _fingerprint(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()[:16]


@dataclass
class _User:
    uid: str
    index: int
    keys: core.ReceiverKeypair
    token: core.EpochToken = None
    pk: core.PartialKey = None
    blind: int = 0


@dataclass
class SimResult:
    epochs: List[dict] = field(default_factory=list)
    bus_log: List[Tuple[str, Message]] = field(default_factory=list)

    def checks(self, script: SimScript) -> List[dict]:
        out = []
        for e in self.epochs:
            tag = "epoch%d" % e["epoch"]
            out.append({"name": tag + ".fact1_tau_identical", "passed": e["tau_identical"]})
            out.append({"name": tag + ".fact2_eta_identical", "passed": e["eta_identical"]})
            out.append({"name": tag + ".tau_fresh", "passed": e["tau_fresh"]})
            out.append({"name": tag + ".search_correct",
                        "passed": e["search_correct"] == e["searches"]})
            if script.adversary:
                if script.patched:
                    ok = e["cannot_test"] == e["interceptions"] > 0
                else:
                    ok = (e["bits_recovered"] == e["keywords_recovered"]
                          == e["interceptions"] > 0)
                out.append({"name": tag + ".adversary_outcome", "passed": ok})
        return out


def simulate(script: SimScript) -> SimResult:
    """Run the scripted epochs and collect per-epoch observations."""
    rng = random.Random(script.seed)
    gp = core.setup(script.backend)
    G = gp.group
    bus = MessageBus()
    ca = core.CertificateAuthority(rng)
    committee = core.Committee(gp, core.committee_keygen(gp, rng))
    server_role = "server" if script.patched else "cloud"
    server = dtester.server_keygen(gp, rng) if script.patched else None
    if script.adversary:
        bus.tap_public("adversary")

    users = []
    for k in range(script.users):
        uid = "adversary" if (script.adversary and k == script.users - 1) else "u%d" % k
        users.append(_User(uid, k + 1, core.receiver_keygen(gp, rng, index=k + 1)))
    sender_user = users[0]
    sender = core.sender_keygen(gp, rng)
    pool = [u for u in users[1:] if u.uid != "adversary"]
    by_id = {u.uid: u for u in users}
    directory = {u.index: u.keys.Y for u in users}

    result = SimResult()
    seen_taus = set()
    for epoch in range(1, script.epochs + 1):
        # enrollment condition 1: token from the CA
        for u in users:
            bus.send(Message(epoch, "ca", u.uid, "token", ca.enroll(u.uid, epoch)))
        # enrollment condition 2: partial key from the committee
        for u in users:
            (msg,) = bus.drain(u.uid, "token")
            u.token = msg.payload
            if script.blind_issuance:
                u.blind = G.random_scalar(rng)
                req = core.blind_request(gp, u.token, u.blind)
                bus.send(Message(epoch, u.uid, "committee", "blind_request", req))
            else:
                bus.send(Message(epoch, u.uid, "committee", "pk_request", u.token))
        for msg in bus.drain("committee"):
            if msg.kind == "blind_request":
                reply = committee.sign_blinded(msg.payload)
            else:
                reply = committee.partial_key(msg.payload)
            bus.send(Message(epoch, "committee", msg.src, "pk_reply", reply))
        for u in users:
            (msg,) = bus.drain(u.uid, "pk_reply")
            if script.blind_issuance:
                sigma = core.unblind(gp, msg.payload, u.blind, committee.public)
                u.pk = core.partial_key_from_signature(gp, sigma)
            else:
                u.pk = msg.payload

        taus = {u.token.tau for u in users}
        etas = {G.encode_scalar(u.pk.eta) for u in users}
        tau = users[0].token.tau
        fresh = tau not in seen_taus
        seen_taus.add(tau)

        # sender encrypts every keyword to this epoch's document receiver set
        doc_receivers = sorted(rng.sample(pool, script.receivers), key=lambda u: u.index)
        I = tuple(u.index for u in doc_receivers)
        Ys = tuple(u.keys.Y for u in doc_receivers)
        for kw_id, w in enumerate(script.keywords):
            c = core.const_enc_keyword(gp, sender.X, I, Ys, sender_user.pk.eta, w, rng)
            bus.send(Message(epoch, sender_user.uid, server_role, "ciphertext",
                             (kw_id, c), public=True))

        # each receiver searches for one keyword
        truth = {}
        for u in doc_receivers:
            kw_id = rng.randrange(len(script.keywords))
            truth[u.uid] = kw_id
            t = core.trapdoor(gp, sender.X, u.keys, I, Ys, u.pk.eta, script.keywords[kw_id])
            if server is not None:
                t = dtester.wrap_trapdoor(gp, t, server.D, rng)
            bus.send(Message(epoch, u.uid, server_role, "trapdoor", t, public=True))

        # search server answers over private legs
        stored = [m.payload for m in bus.drain(server_role, "ciphertext")]
        for msg in bus.drain(server_role, "trapdoor"):
            if server is not None:
                hits = [k for k, c in stored if dtester.designated_test(gp, c, msg.payload, server)]
            else:
                hits = [k for k, c in stored if core.test(gp, c, msg.payload)]
            bus.send(Message(epoch, server_role, msg.src, "result", hits))
        correct = 0
        for u in doc_receivers:
            (msg,) = bus.drain(u.uid, "result")
            correct += msg.payload == [truth[u.uid]]

        obs = {
            "epoch": epoch,
            "tau_fingerprint": _fingerprint(tau),
            "tau_identical": len(taus) == 1,
            "eta_identical": len(etas) == 1,
            "tau_fresh": fresh,
            "receiver_set": list(I),
            "searches": len(doc_receivers),
            "search_correct": correct,
            "interceptions": 0,
            "bits_recovered": 0,
            "keywords_recovered": 0,
            "cannot_test": 0,
        }
        if script.adversary:
            _run_adversary(gp, bus, by_id["adversary"], sender.X, directory, script, truth, rng, obs)
        bus.drain("adversary")
        result.epochs.append(obs)

    result.bus_log = bus.log
    return result


def _run_adversary(gp, bus, adv, X, directory, script, truth, rng, obs):
    """Attack every trapdoor tapped from the public channel."""
    intercepted = bus.drain("adversary", "trapdoor")
    obs["interceptions"] = len(intercepted)
    for msg in intercepted:
        t = msg.payload
        if isinstance(t, WrappedTrapdoor):
            view = SetupView(gp=gp, token=adv.token, partial_key=adv.pk, X=X,
                             receiver_ids=(), receiver_publics=())
            try:
                attack_adversary(view, t, b"", b"")
            except CannotTest:
                obs["cannot_test"] += 1
            continue
        # public keys of the named receivers are public knowledge
        I = t.receiver_set
        Ys = tuple(directory[i] for i in I)
        view = SetupView(gp=gp, token=adv.token, partial_key=adv.pk, X=X,
                         receiver_ids=tuple(I), receiver_publics=Ys)
        actual = truth[msg.src]
        # identity bit: the harness pairs the true keyword with a decoy
        decoy = rng.choice([k for k in range(len(script.keywords)) if k != actual]) \
            if len(script.keywords) > 1 else None
        if decoy is not None:
            b = rng.randrange(2)
            pair = (actual, decoy) if b == 0 else (decoy, actual)
            guess = attack_adversary(view, t, script.keywords[pair[0]],
                                     script.keywords[pair[1]], rng)
            obs["bits_recovered"] += guess == b
        else:
            obs["bits_recovered"] += 1
        # keyword guessing over the whole universe
        for k, w in enumerate(script.keywords):
            if attack_adversary(view, t, w, b"", rng) == 0:
                obs["keywords_recovered"] += k == actual
                break
