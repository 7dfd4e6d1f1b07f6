"""KT-IND-CKA game in which the challenger hands the adversary tau and eta.

A registered user legitimately holds the epoch token and partial key, so a
faithful simulation must give them to the adversary. With them, the
adversary can encrypt ``w0`` itself and run Test against the challenge
trapdoor, which decides ``b`` every time.

Phases run in order: setup, query1, challenge, query2, guess.
"""
from __future__ import annotations

import hashlib
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from . import core, dtester
from .core import GlobalParams, KeywordCiphertext, Trapdoor
from .dtester import WrappedTrapdoor
from .errors import (CannotTest, InvalidChallenge, OracleBudgetExceeded,
                     PhaseViolation)
from .group import PRODUCTION, Point, Scalar
from .vectors import random_keyword

SETUP, QUERY1, CHALLENGE, QUERY2, GUESS, DONE = (
    "setup", "query1", "challenge", "query2", "guess", "done")
QUERY_PHASES = (QUERY1, QUERY2)
DEFAULT_ORACLE_BUDGET = 128
SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class GameConfig:
    n_receivers: int = 3
    trials: int = 1
    seed: int = 0
    backend: str = PRODUCTION
    patched: bool = False
    # patched scheme, but the designated server shares d with the adversary
    collude_server: bool = False
    # draw |I| uniformly from [1, n_receivers] per trial
    vary_receivers: bool = False
    oracle_budget: int = DEFAULT_ORACLE_BUDGET

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.n_receivers < 1:
            raise ValueError("n_receivers must be >= 1")
        if not 0 <= self.seed <= SEED_MASK:
            raise ValueError("seed must fit in 64 bits")

    @property
    def variant(self) -> str:
        if not self.patched:
            return "dccse"
        return "dccse+dtester-colluding" if self.collude_server else "dccse+dtester"


@dataclass(frozen=True)
class ChallengeRequest:
    w0: bytes
    w1: bytes

    def __post_init__(self):
        if self.w0 == self.w1:
            raise InvalidChallenge("challenge keywords must differ")


@dataclass(frozen=True)
class SetupView:
    """Everything a registered user sees after Setup."""
    gp: GlobalParams
    token: core.EpochToken
    partial_key: core.PartialKey
    X: Point
    receiver_ids: Tuple[int, ...]
    receiver_publics: Tuple[Point, ...]
    server_public: Optional[Point] = None
    # only populated when the designated server colludes
    server_secret: Optional[Scalar] = None


@dataclass(frozen=True)
class OracleCall:
    phase: str
    kind: str
    keyword: bytes


class Oracles:
    """Ciphertext and trapdoor oracles under the game's honest keys."""

    def __init__(self, challenger: "_Challenger", budget: int):
        self._ch = challenger
        self.budget = budget
        self.log: List[OracleCall] = []

    def _admit(self, kind: str, w: bytes) -> None:
        if self._ch.phase not in QUERY_PHASES:
            raise PhaseViolation("oracle %s called during %s" % (kind, self._ch.phase))
        if len(self.log) >= self.budget:
            raise OracleBudgetExceeded("oracle budget of %d exhausted" % self.budget)
        self.log.append(OracleCall(self._ch.phase, kind, bytes(w)))

    def ciphertext(self, w: bytes) -> KeywordCiphertext:
        self._admit("ciphertext", w)
        return self._ch.encrypt(w)

    def trapdoor(self, w: bytes) -> Union[Trapdoor, WrappedTrapdoor]:
        ch = self._ch
        if ch.challenge is not None and bytes(w) in (ch.challenge.w0, ch.challenge.w1):
            raise InvalidChallenge("trapdoor query on a challenge keyword")
        self._admit("trapdoor", w)
        return ch.issue_trapdoor(w)

    def trapdoor_queried(self) -> set:
        return {c.keyword for c in self.log if c.kind == "trapdoor"}


@dataclass
class GameTranscript:
    tau: bytes
    eta: Scalar
    X: Point
    receiver_ids: Tuple[int, ...]
    receiver_publics: Tuple[Point, ...]
    w0: bytes
    w1: bytes
    b: int
    target_index: int
    t_star: Union[Trapdoor, WrappedTrapdoor]
    guess: int
    oracle_log: Tuple[OracleCall, ...]
    correct: bool
    variant: str
    honest_tau: bytes = b""
    honest_eta: Scalar = 0
    adversary_blocked: bool = False

    def to_dict(self, gp: GlobalParams) -> dict:
        G = gp.group
        if isinstance(self.t_star, WrappedTrapdoor):
            t_star = {"wrapped": dtester.encode_wrapped(gp, self.t_star).hex()}
        else:
            t_star = {"trapdoor": core.encode_trapdoor(G, self.t_star).hex()}
        return {
            "variant": self.variant,
            "tau": self.tau.hex(),
            "eta": G.encode_scalar(self.eta).hex(),
            "X": G.encode_point(self.X).hex(),
            "receivers": [[i, G.encode_point(Y).hex()]
                          for i, Y in zip(self.receiver_ids, self.receiver_publics)],
            "challenge": [self.w0.hex(), self.w1.hex()],
            "b": self.b,
            "target_index": self.target_index,
            "t_star": t_star,
            "guess": self.guess,
            "oracle_log": [[c.phase, c.kind, c.keyword.hex()] for c in self.oracle_log],
            "correct": self.correct,
        }


class Adversary:
    """Base adversary: skips both query phases.

    Subclasses override :meth:`choose` and :meth:`guess`.
    """

    name = "base"

    def __init__(self, rng: Optional[random.Random] = None):
        self.rng = rng or random.Random()
        self.view: Optional[SetupView] = None

    def setup(self, view: SetupView) -> None:
        self.view = view

    def query1(self, oracles: Oracles) -> None:
        pass

    def choose(self) -> Tuple[bytes, bytes]:
        w0 = random_keyword(self.rng)
        w1 = random_keyword(self.rng)
        while w1 == w0:
            w1 = random_keyword(self.rng)
        return w0, w1

    def query2(self, oracles: Oracles) -> None:
        pass

    def guess(self, t_star) -> int:
        raise NotImplementedError


class CoinFlipAdversary(Adversary):
    name = "coin"

    def guess(self, t_star) -> int:
        return self.rng.randrange(2)


def attack_adversary(view: SetupView, t_star: Trapdoor, w0: bytes, w1: bytes,
                     rng=None) -> int:
    """Encrypt ``w0`` with the shared ``eta`` and Test it against ``t_star``.

    Returns 0 if the trapdoor matches ``w0`` and 1 otherwise. A wrapped
    trapdoor cannot be tested, so it raises :class:`CannotTest`.
    """
    if isinstance(t_star, WrappedTrapdoor):
        raise CannotTest("challenge trapdoor is encrypted to the designated server")
    gp = view.gp
    c_w0 = core.const_enc_keyword(gp, view.X, view.receiver_ids, view.receiver_publics,
                                  view.partial_key.eta, w0, rng)
    return 0 if core.test(gp, c_w0, t_star) else 1


class AttackAdversary(Adversary):
    """The registered-user distinguisher; falls back to a coin flip when blocked."""

    name = "attack"

    def __init__(self, rng=None):
        super().__init__(rng)
        self.blocked = False

    def guess(self, t_star) -> int:
        w0, w1 = self.challenge
        if isinstance(t_star, WrappedTrapdoor) and self.view.server_secret is not None:
            t_star = dtester.unwrap_trapdoor(self.view.gp, t_star, self.view.server_secret)
        try:
            return attack_adversary(self.view, t_star, w0, w1, self.rng)
        except CannotTest:
            self.blocked = True
            return self.rng.randrange(2)

    def choose(self):
        self.challenge = super().choose()
        return self.challenge


ADVERSARIES = {
    AttackAdversary.name: AttackAdversary,
    CoinFlipAdversary.name: CoinFlipAdversary,
}


class _Challenger:
    def __init__(self, gp, config, rng):
        self.gp = gp
        self.config = config
        self.rng = rng
        self.phase = SETUP
        self.challenge: Optional[ChallengeRequest] = None

    def encrypt(self, w):
        return core.const_enc_keyword(self.gp, self.sender.X, self.ids, self.Ys,
                                      self.honest_pk.eta, w, self.rng)

    def issue_trapdoor(self, w):
        t = core.trapdoor(self.gp, self.sender.X, self.target, self.ids, self.Ys,
                          self.honest_pk.eta, w)
        if self.config.patched:
            return dtester.wrap_trapdoor(self.gp, t, self.server.D, self.rng)
        return t


def run_game(config: GameConfig, adversary: Adversary, rng: random.Random,
             gp: Optional[GlobalParams] = None) -> GameTranscript:
    """Play one game between a fresh challenger and ``adversary``."""
    gp = gp or core.setup(config.backend)
    ch = _Challenger(gp, config, rng)

    # setup: one epoch, one committee; the adversary and the target receiver
    # both enroll through the same CA and committee
    ca = core.CertificateAuthority(rng)
    committee = core.Committee(gp, core.committee_keygen(gp, rng))
    epoch = 1
    n = rng.randint(1, config.n_receivers) if config.vary_receivers else config.n_receivers
    ch.sender = core.sender_keygen(gp, rng)
    receivers = [core.receiver_keygen(gp, rng, index=i + 1) for i in range(n)]
    ch.ids = tuple(r.index for r in receivers)
    ch.Ys = tuple(r.Y for r in receivers)
    ch.target = rng.choice(receivers)
    honest_token = ca.enroll("R%d" % ch.target.index, epoch)
    ch.honest_pk = committee.partial_key(honest_token)
    ch.server = dtester.server_keygen(gp, rng) if config.patched else None

    adv_token = ca.enroll("adversary", epoch)
    view = SetupView(
        gp=gp, token=adv_token, partial_key=committee.partial_key(adv_token),
        X=ch.sender.X, receiver_ids=ch.ids, receiver_publics=ch.Ys,
        server_public=ch.server.D if ch.server else None,
        server_secret=ch.server.d if (ch.server and config.collude_server) else None,
    )
    oracles = Oracles(ch, config.oracle_budget)
    adversary.setup(view)

    ch.phase = QUERY1
    adversary.query1(oracles)

    ch.phase = CHALLENGE
    w0, w1 = adversary.choose()
    request = ChallengeRequest(bytes(w0), bytes(w1))
    if oracles.trapdoor_queried() & {request.w0, request.w1}:
        raise InvalidChallenge("challenge keyword was already trapdoor-queried")
    ch.challenge = request
    b = rng.randrange(2)
    t_star = ch.issue_trapdoor((request.w0, request.w1)[b])

    ch.phase = QUERY2
    adversary.query2(oracles)

    ch.phase = GUESS
    guess = adversary.guess(t_star)
    if guess not in (0, 1):
        raise ValueError("adversary must output a bit, got %r" % (guess,))
    ch.phase = DONE

    return GameTranscript(
        tau=view.token.tau, eta=view.partial_key.eta, X=view.X,
        receiver_ids=ch.ids, receiver_publics=ch.Ys, w0=request.w0, w1=request.w1,
        b=b, target_index=ch.target.index, t_star=t_star, guess=guess,
        oracle_log=tuple(oracles.log), correct=(guess == b), variant=config.variant,
        honest_tau=honest_token.tau, honest_eta=ch.honest_pk.eta,
        adversary_blocked=getattr(adversary, "blocked", False),
    )


def trial_rng(seed: int, trial: int) -> random.Random:
    """Independent, reproducible stream for one trial."""
    digest = hashlib.blake2b(trial.to_bytes(8, "big"), key=seed.to_bytes(8, "big"),
                             person=b"dccse-trial").digest()
    return random.Random(int.from_bytes(digest, "big"))


def play_trial(config: GameConfig, adversary_id: str, trial: int,
               gp: Optional[GlobalParams] = None) -> GameTranscript:
    rng = trial_rng(config.seed, trial)
    adversary = ADVERSARIES[adversary_id](random.Random(rng.getrandbits(64)))
    return run_game(config, adversary, rng, gp)


@dataclass(frozen=True)
class AdvantageReport:
    trials: int
    successes: int
    p_hat: float
    advantage: float
    confidence_halfwidth: float
    adversary: str = ""
    variant: str = ""
    seed: int = 0
    blocked: int = 0

    @classmethod
    def from_counts(cls, trials: int, successes: int, **extra) -> "AdvantageReport":
        p_hat = successes / trials
        return cls(trials, successes, p_hat, abs(p_hat - 0.5),
                   3 * math.sqrt(p_hat * (1 - p_hat) / trials), **extra)

    def to_dict(self) -> dict:
        return {
            "scheme_variant": self.variant,
            "adversary": self.adversary,
            "trials": self.trials,
            "successes": self.successes,
            "p_hat": self.p_hat,
            "advantage": self.advantage,
            "confidence_halfwidth_3sigma": self.confidence_halfwidth,
            "seed": self.seed,
        }


def _chunk(args) -> Tuple[int, int]:
    config, adversary_id, trials = args
    gp = core.setup(config.backend)
    wins = blocked = 0
    for t in trials:
        tr = play_trial(config, adversary_id, t, gp)
        wins += tr.correct
        blocked += tr.adversary_blocked
    return wins, blocked


def estimate_advantage(config: GameConfig, adversary: str = "attack",
                       workers: int = 1) -> AdvantageReport:
    """Run ``config.trials`` independent games and report ``|p_hat - 1/2|``.

    Trial ``t`` always uses the stream ``trial_rng(seed, t)``, so the result
    does not depend on ``workers``.
    """
    if adversary not in ADVERSARIES:
        raise ValueError("unknown adversary %r" % (adversary,))
    trials = range(config.trials)
    if workers <= 1:
        parts = [_chunk((config, adversary, trials))]
    else:
        chunks = [(config, adversary, trials[k::workers]) for k in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_chunk, chunks))
    wins = sum(p[0] for p in parts)
    blocked = sum(p[1] for p in parts)
    return AdvantageReport.from_counts(config.trials, wins, adversary=adversary,
                                       variant=config.variant, seed=config.seed,
                                       blocked=blocked)
