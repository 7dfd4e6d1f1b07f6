import math
import random

import pytest

from dccse import core, game
from dccse.dtester import WrappedTrapdoor
from dccse.errors import (CannotTest, InvalidChallenge, OracleBudgetExceeded,
                          PhaseViolation)
from dccse.game import (AttackAdversary, CoinFlipAdversary, GameConfig,
                        SetupView, attack_adversary, run_game)
from dccse.vectors import TOY_W0, TOY_W1, random_instance, toy_vector


def _view(gp, inst, eta):
    pk = core.PartialKey(None, eta)
    return SetupView(gp, core.EpochToken(1, b""), pk, inst.X, inst.I, inst.Ys)


@pytest.mark.parametrize("b", [0, 1])
def test_attack_branches(prod, b):
    rng = random.Random(b)
    inst = random_instance(prod, rng, 4)
    w0, w1 = b"apple", b"banana"
    t = core.trapdoor(prod, inst.X, inst.receivers[2], inst.I, inst.Ys, inst.eta, (w0, w1)[b])
    assert attack_adversary(_view(prod, inst, inst.eta), t, w0, w1, rng) == b


def test_attack_on_toy_vector():
    v = toy_vector()
    view = SetupView(v.gp, core.EpochToken(1, b""), v.partial_key, v.X, v.I, v.Ys)
    rng = random.Random(1)
    assert attack_adversary(view, v.trapdoor_w0, TOY_W0, TOY_W1, rng) == 0
    assert attack_adversary(view, v.trapdoor_w1, TOY_W0, TOY_W1, rng) == 1


def test_attack_refuses_wrapped():
    view = SetupView(core.setup("toy"), None, None, 1, (1,), (5,))
    with pytest.raises(CannotTest):
        attack_adversary(view, WrappedTrapdoor(1, b"", b""), b"a", b"b")


@pytest.mark.parametrize("seed", range(8))
def test_unpatched_attack_always_correct(seed):
    cfg = GameConfig(n_receivers=4, seed=seed)
    tr = run_game(cfg, AttackAdversary(random.Random(seed)), random.Random(seed))
    assert tr.correct
    assert tr.oracle_log == ()  # the attack never queries


def test_revised_model_view_matches_honest_users():
    cfg = GameConfig(n_receivers=3)
    tr = run_game(cfg, AttackAdversary(random.Random(1)), random.Random(2))
    assert tr.tau == tr.honest_tau
    assert tr.eta == tr.honest_eta


def test_patched_transcript_holds_only_wrapped():
    cfg = GameConfig(n_receivers=3, patched=True)
    adv = AttackAdversary(random.Random(1))
    tr = run_game(cfg, adv, random.Random(3))
    assert isinstance(tr.t_star, WrappedTrapdoor)
    assert adv.blocked and tr.adversary_blocked
    assert "wrapped" in tr.to_dict(core.setup("production"))["t_star"]


def test_colluding_server_restores_attack():
    cfg = GameConfig(n_receivers=3, patched=True, collude_server=True, trials=20)
    rep = game.estimate_advantage(cfg)
    assert rep.successes == 20 and rep.blocked == 0


def test_coin_flip_near_half():
    cfg = GameConfig(n_receivers=2, trials=4000, backend="toy", seed=11)
    rep = game.estimate_advantage(cfg, "coin")
    # 3 sigma at n = 4000 is 0.0237
    assert rep.advantage <= 3 * math.sqrt(0.25 / 4000)


class HonestOracleUser(AttackAdversary):
    def query1(self, oracles):
        c = oracles.ciphertext(b"probe")
        t = oracles.trapdoor(b"probe")
        self.probe_ok = core.test(self.view.gp, c, t)


def test_oracles_are_honest_and_logged():
    adv = HonestOracleUser(random.Random(1))
    tr = run_game(GameConfig(n_receivers=3), adv, random.Random(4))
    assert adv.probe_ok
    assert [(c.phase, c.kind) for c in tr.oracle_log] == [
        ("query1", "ciphertext"), ("query1", "trapdoor")]


class LateCaller(AttackAdversary):
    def query1(self, oracles):
        self.oracles = oracles

    def guess(self, t_star):
        self.oracles.ciphertext(b"x")


def test_oracle_outside_query_phase():
    with pytest.raises(PhaseViolation):
        run_game(GameConfig(backend="toy"), LateCaller(random.Random()), random.Random(5))


class Greedy(AttackAdversary):
    def query1(self, oracles):
        for k in range(oracles.budget + 1):
            oracles.ciphertext(b"%d" % k)


def test_oracle_budget():
    with pytest.raises(OracleBudgetExceeded):
        run_game(GameConfig(backend="toy", oracle_budget=4), Greedy(random.Random()),
                 random.Random(6))


class SameWords(AttackAdversary):
    def choose(self):
        self.challenge = (b"x", b"x")
        return self.challenge


def test_equal_challenge_rejected():
    with pytest.raises(InvalidChallenge):
        run_game(GameConfig(backend="toy"), SameWords(random.Random()), random.Random(7))


class PeekAtChallenge(AttackAdversary):
    def query2(self, oracles):
        oracles.trapdoor(self.challenge[0])


class PreQueried(AttackAdversary):
    def query1(self, oracles):
        oracles.trapdoor(b"known")

    def choose(self):
        self.challenge = (b"known", b"other")
        return self.challenge


@pytest.mark.parametrize("cls", [PeekAtChallenge, PreQueried])
def test_trapdoor_queries_on_challenge_keywords_rejected(cls):
    with pytest.raises(InvalidChallenge):
        run_game(GameConfig(backend="toy"), cls(random.Random()), random.Random(8))


class FixedLength(AttackAdversary):
    def __init__(self, rng, length):
        super().__init__(rng)
        self.length = length

    def choose(self):
        w0 = bytes([1]) * self.length
        w1 = bytes([2]) * self.length
        self.challenge = (w0, w1)
        return self.challenge


def test_success_independent_of_size_index_and_length():
    gp = core.setup("production")
    seen_targets = set()
    for n in range(1, 11):
        for length in (1, 7, 33, 64):
            rng = random.Random(n * 100 + length)
            tr = run_game(GameConfig(n_receivers=n), FixedLength(random.Random(n), length),
                          rng, gp)
            assert tr.correct
            seen_targets.add((n, tr.target_index))
    assert len({i for n, i in seen_targets if n == 10}) > 1


def test_determinism_same_seed():
    cfg = GameConfig(n_receivers=5, seed=99)
    gp = core.setup("production")
    a = [game.play_trial(cfg, "attack", t, gp).to_dict(gp) for t in range(3)]
    b = [game.play_trial(cfg, "attack", t, gp).to_dict(gp) for t in range(3)]
    assert a == b
    assert a[0] != a[1]


def test_workers_do_not_change_result():
    cfg = GameConfig(n_receivers=3, trials=40, backend="toy", seed=5, patched=True)
    assert game.estimate_advantage(cfg, workers=1) == game.estimate_advantage(cfg, workers=2)


def test_report_math():
    rep = game.AdvantageReport.from_counts(100, 60)
    assert rep.p_hat == 0.6
    assert rep.advantage == pytest.approx(0.1)
    assert rep.confidence_halfwidth == pytest.approx(3 * math.sqrt(0.24 / 100))
    assert 0 <= game.AdvantageReport.from_counts(10, 0).advantage <= 0.5


def test_config_validation():
    with pytest.raises(ValueError):
        GameConfig(trials=0)
    with pytest.raises(ValueError):
        GameConfig(n_receivers=0)
    with pytest.raises(ValueError):
        GameConfig(seed=-1)
    with pytest.raises(ValueError):
        game.estimate_advantage(GameConfig(), "oracle")


def test_coin_flip_adversary_class():
    adv = CoinFlipAdversary(random.Random(0))
    assert {adv.guess(None) for _ in range(50)} == {0, 1}
