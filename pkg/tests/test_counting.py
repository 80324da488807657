import math

import numpy as np
import pytest

from qpdm.counting import (
    CountingConfig,
    EstimationError,
    SupportEstimate,
    counting_distribution,
    default_counting_width,
    estimate_confidence,
    estimate_error_bound,
    joint_support,
    phase_readout,
    quantum_count,
)
from qpdm.dataset import TransactionDatabase, exact_confidence, vertical_partition
from qpdm.protocol import Transcript, build_qram, make_key, reference_phase_oracle, transcript_total

DB16_T4 = TransactionDatabase(
    2,
    ("11", "11", "11", "11", "10", "10", "10", "01", "01", "01", "00", "00", "00", "10", "01", "00"),
    16,
)

FOUR_ROWS = TransactionDatabase(3, ("110", "100", "011", "111"), 4)


def parties(db, l):
    n = (db.n_transactions - 1).bit_length()
    alice_view, bob_view = vertical_partition(db, l)
    return build_qram(alice_view, n), build_qram(bob_view, n)


def db_with_marked(n, t, seed=0):
    """2^n rows over 2 items with exactly t rows containing {1, 2}."""
    rng = np.random.default_rng(seed)
    rest = [rng.choice(["10", "01", "00"]) for _ in range((1 << n) - t)]
    rows = ["11"] * t + [str(r) for r in rest]
    return TransactionDatabase(2, tuple(rows), 1 << n)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            CountingConfig(p=0, s=0.5)
        with pytest.raises(ValueError):
            CountingConfig(p=3, s=1.5)
        with pytest.raises(ValueError):
            CountingConfig(p=3, s=0.5, agreement_band=0)
        with pytest.raises(ValueError):
            CountingConfig(p=3, s=0.5, key_family="rot13")

    def test_default_width_matches_recommended_scaling(self):
        # P ~ 2000 / s rounded up to a power of two
        assert default_counting_width(0.25) == 13
        assert 1 << default_counting_width(0.5) >= 2000 / 0.5


class TestDistribution:
    def test_no_marked_rows_reads_zero(self):
        db = db_with_marked(3, 0)
        alice, bob = parties(db, 1)
        bob = bob.with_key(make_key("bitflip", 3, 3))
        config = CountingConfig(p=4, s=0.25)
        probs = counting_distribution("alice", alice, bob, frozenset({1, 2}), config)
        assert probs[0] == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("initiator", ["alice", "bob"])
    @pytest.mark.parametrize("p", [2, 3, 4])
    def test_statevector_equals_trajectory(self, initiator, p):
        rng = np.random.default_rng(p)
        rows = tuple("".join(rng.choice(["0", "1"], size=3)) for _ in range(8))
        db = TransactionDatabase(3, rows, 8)
        alice, bob = parties(db, 2)
        key = make_key("modadd", 3, 3)
        alice, bob = alice.with_key(key), bob.with_key(key)
        config = CountingConfig(p=p, s=0.3)
        z = frozenset({1, 3})
        t_sv, t_tr = Transcript(), Transcript()
        sv = counting_distribution(initiator, alice, bob, z, config, t_sv, method="statevector")
        tr = counting_distribution(initiator, alice, bob, z, config, t_tr, method="trajectory")
        assert np.max(np.abs(sv - tr)) < 1e-10
        assert t_sv.events == t_tr.events
        assert len(t_sv.events) == (config.P - 1) * 4

    def test_matches_independent_dense_phase_estimation(self):
        # fully independent route: dense textbook matrices, no simulator
        rng = np.random.default_rng(21)
        rows = tuple("".join(rng.choice(["0", "1"], size=3)) for _ in range(8))
        db = TransactionDatabase(3, rows, 8)
        z = frozenset({1, 3})
        key = make_key("modadd", 5, 3)
        alice, bob = parties(db, 1)
        config = CountingConfig(p=4, s=0.3)
        got = counting_distribution("alice", alice, bob.with_key(key), z, config)

        signs = reference_phase_oracle(db, z, key.apply).astype(float)
        m, P = 8, config.P
        grover = (2 / m * np.ones((m, m)) - np.eye(m)) @ np.diag(signs)
        psi = np.full(m, m**-0.5)
        walk = np.stack(
            [np.linalg.matrix_power(grover, step) @ psi for step in range(P)]
        ) / math.sqrt(P)
        dft = np.exp(-2j * np.pi * np.outer(np.arange(P), np.arange(P)) / P) / math.sqrt(P)
        expected = (np.abs(dft @ walk) ** 2).sum(axis=1)
        assert np.max(np.abs(got - expected)) < 1e-10

    def test_exact_phase_sharpness(self):
        # t/2^n = 1/2 has eigenphase exactly 1/4: all mass on P/4 and 3P/4
        db = db_with_marked(3, 4)
        alice, bob = parties(db, 1)
        bob = bob.with_key(make_key("cyclic", 1, 3))
        config = CountingConfig(p=3, s=0.25)
        probs = counting_distribution("alice", alice, bob, frozenset({1, 2}), config)
        on_peak = probs[2] + probs[6]
        assert on_peak == pytest.approx(1.0, abs=1e-10)

    def test_all_marked_reads_half(self):
        db = TransactionDatabase(2, ("11",) * 8, 8)
        alice, bob = parties(db, 1)
        bob = bob.with_key(make_key("bitflip", 0, 3))
        config = CountingConfig(p=4, s=0.25)
        probs = counting_distribution("alice", alice, bob, frozenset({1, 2}), config)
        assert probs[config.P // 2] == pytest.approx(1.0, abs=1e-10)

    def test_mirror_symmetry(self):
        for n, p, t in ((3, 4, 3), (4, 6, 5), (4, 5, 2)):
            db = db_with_marked(n, t, seed=n + p)
            alice, bob = parties(db, 1)
            bob = bob.with_key(make_key("bitflip", 1, n))
            config = CountingConfig(p=p, s=0.25)
            probs = counting_distribution("alice", alice, bob, frozenset({1, 2}), config)
            mirrored = np.concatenate([probs[:1], probs[1:][::-1]])
            assert np.max(np.abs(probs - mirrored)) < 1e-12

    def test_initiator_symmetry_exact_distributions(self):
        db = db_with_marked(3, 3, seed=5)
        alice, bob = parties(db, 1)
        config = CountingConfig(p=5, s=0.25)
        z = frozenset({1, 2})
        d1 = counting_distribution("alice", alice, bob.with_key(make_key("bitflip", 5, 3)), z, config)
        d2 = counting_distribution("bob", alice.with_key(make_key("bitflip", 2, 3)), bob, z, config)
        assert np.max(np.abs(d1 - d2)) < 1e-12

    def test_key_invariance_all_bitflip_keys(self):
        db = db_with_marked(3, 3, seed=6)
        alice, bob = parties(db, 1)
        config = CountingConfig(p=5, s=0.25)
        z = frozenset({1, 2})
        base = None
        for lam in range(8):
            probs = counting_distribution(
                "alice", alice, bob.with_key(make_key("bitflip", lam, 3)), z, config
            )
            if base is None:
                base = probs
            else:
                assert np.max(np.abs(probs - base)) < 1e-12

    def test_n16_t4_p64_concentration(self):
        alice, bob = parties(DB16_T4, 1)
        bob = bob.with_key(make_key("bitflip", 9, 4))
        config = CountingConfig(p=6, s=0.25)
        probs = counting_distribution("alice", alice, bob, frozenset({1, 2}), config)
        # eigenphase 1/6: nearest readouts 10, 11 and mirrors 53, 54
        peak = probs[10] + probs[11] + probs[53] + probs[54]
        assert peak > 8 / math.pi**2
        for f in (10, 11, 53, 54):
            assert abs(phase_readout(f, 64) - 0.25) <= estimate_error_bound(0.25, 64)


class TestQuantumCount:
    def test_deterministic_per_seed(self):
        alice, bob = parties(DB16_T4, 1)
        bob = bob.with_key(make_key("bitflip", 3, 4))
        config = CountingConfig(p=6, s=0.25)
        e1 = quantum_count("alice", alice, bob, frozenset({1, 2}), config, np.random.default_rng(7))
        e2 = quantum_count("alice", alice, bob, frozenset({1, 2}), config, np.random.default_rng(7))
        assert e1 == e2

    def test_methods_agree_per_seed(self):
        db = db_with_marked(3, 2, seed=8)
        alice, bob = parties(db, 1)
        bob = bob.with_key(make_key("modadd", 5, 3))
        config = CountingConfig(p=3, s=0.25)
        z = frozenset({1, 2})
        sv = quantum_count("alice", alice, bob, z, config, np.random.default_rng(3), method="statevector")
        tr = quantum_count("alice", alice, bob, z, config, np.random.default_rng(3), method="trajectory")
        assert sv == pytest.approx(tr, abs=1e-12)

    def test_rescaling_to_original_count(self):
        # 8 padded rows but only 5 real ones; all real rows contain {1}
        db = TransactionDatabase(2, ("10", "11", "10", "10", "11", "00", "00", "00"), 5)
        alice, bob = parties(db, 1)
        bob = bob.with_key(make_key("bitflip", 0, 3))
        config = CountingConfig(p=6, s=0.3)
        est = quantum_count("alice", alice, bob, frozenset({1}), config, np.random.default_rng(11))
        # padded-space fraction 5/8 estimated, then rescaled by 8/5 toward 1.0
        assert est == pytest.approx(1.0, abs=0.05)

    def test_transcript_full_count_total(self):
        alice, bob = parties(DB16_T4, 1)
        bob = bob.with_key(make_key("bitflip", 3, 4))
        config = CountingConfig(p=5, s=0.25)
        transcript = Transcript()
        quantum_count("alice", alice, bob, frozenset({1, 2}), config, np.random.default_rng(0), transcript)
        total, per_call = transcript_total(transcript)
        n = 4
        assert total == (config.P - 1) * (4 * n + 2)
        assert per_call == 4 * n + 2 <= 4 * (n + 1)


class TestJointSupport:
    def test_agreement_rule_accepts(self, monkeypatch):
        values = iter([0.250, 0.252])
        monkeypatch.setattr(
            "qpdm.counting.quantum_count", lambda *a, **k: next(values)
        )
        alice, bob = parties(DB16_T4, 1)
        config = CountingConfig(p=6, s=0.25, agreement_band=0.01)
        est = joint_support(alice, bob, frozenset({1, 2}), config, np.random.default_rng(0))
        assert est.accepted
        assert est.rounds_used == 1
        assert est.value == pytest.approx(0.251)
        assert (est.s1, est.s2) == (0.250, 0.252)

    def test_agreement_rule_retries(self, monkeypatch):
        values = iter([0.25, 0.30, 0.25, 0.251])
        monkeypatch.setattr(
            "qpdm.counting.quantum_count", lambda *a, **k: next(values)
        )
        alice, bob = parties(DB16_T4, 1)
        config = CountingConfig(p=6, s=0.25, agreement_band=0.01)
        est = joint_support(alice, bob, frozenset({1, 2}), config, np.random.default_rng(0))
        assert est.accepted
        assert est.rounds_used == 2

    def test_exhaustion_reports_last_round(self, monkeypatch):
        monkeypatch.setattr(
            "qpdm.counting.quantum_count",
            lambda *a, **k: 0.1 if getattr(quantum_count, "_flip", False) else 0.9,
        )
        calls = []

        def fake(*a, **k):
            calls.append(1)
            return 0.1 if len(calls) % 2 else 0.9

        monkeypatch.setattr("qpdm.counting.quantum_count", fake)
        alice, bob = parties(DB16_T4, 1)
        config = CountingConfig(p=6, s=0.25, max_rounds=3)
        est = joint_support(alice, bob, frozenset({1, 2}), config, np.random.default_rng(0))
        assert not est.accepted
        assert est.rounds_used == 3
        assert {est.s1, est.s2} == {0.1, 0.9}

    def test_round_statistics_at_recommended_precision(self):
        # P ~ 2000/s: near-exact estimates, so rounds stay small
        alice, bob = parties(DB16_T4, 1)
        config = CountingConfig(p=13, s=0.25)
        rounds = []
        hits = 0
        n_runs = 25
        for seed in range(n_runs):
            est = joint_support(
                alice, bob, frozenset({1, 2}), config, np.random.default_rng(seed)
            )
            assert est.accepted
            rounds.append(est.rounds_used)
            if abs(est.value - 0.25) <= 0.01 * config.s:
                hits += 1
        assert sum(rounds) / n_runs < 2.2
        assert hits >= 0.8 * n_runs

    def test_fresh_keys_never_leak(self):
        # the parties passed in stay keyless; keys live only inside the round
        alice, bob = parties(DB16_T4, 1)
        config = CountingConfig(p=6, s=0.25, agreement_band=0.5)
        joint_support(alice, bob, frozenset({1, 2}), config, np.random.default_rng(1))
        assert alice.key is None and bob.key is None


class TestConfidence:
    def test_four_row_example_within_bound(self):
        alice, bob = parties(FOUR_ROWS, 2)
        config = CountingConfig(p=8, s=0.4, agreement_band=0.05)
        exact = float(exact_confidence(FOUR_ROWS, frozenset({1}), frozenset({2})))
        hits = 0
        n_runs = 60
        for seed in range(n_runs):
            est = estimate_confidence(
                alice, bob, frozenset({1}), frozenset({2}), config, np.random.default_rng(seed)
            )
            if abs(est.value - exact) <= est.error_bound:
                hits += 1
        # each support lands in its own bound with prob > 8/pi^2
        assert hits >= 0.6 * n_runs

    def test_implication_reads_near_one(self):
        db = TransactionDatabase(2, ("11", "11", "11", "00"), 4)
        alice, bob = parties(db, 1)
        config = CountingConfig(p=8, s=0.4, agreement_band=0.05)
        est = estimate_confidence(
            alice, bob, frozenset({1}), frozenset({2}), config, np.random.default_rng(2)
        )
        assert est.value == pytest.approx(1.0, abs=2 * est.error_bound + 0.02)

    def test_overlap_rejected(self):
        alice, bob = parties(FOUR_ROWS, 2)
        config = CountingConfig(p=4, s=0.4)
        with pytest.raises(ValueError):
            estimate_confidence(
                alice, bob, frozenset({1}), frozenset({1, 2}), config, np.random.default_rng(0)
            )

    def test_rare_antecedent_rejected(self):
        db = TransactionDatabase(2, ("00", "01", "01", "00"), 4)
        alice, bob = parties(db, 1)
        config = CountingConfig(p=6, s=0.3, agreement_band=0.5)
        with pytest.raises(EstimationError):
            estimate_confidence(
                alice, bob, frozenset({1}), frozenset({2}), config, np.random.default_rng(3)
            )

    def test_reports_both_bounds(self):
        alice, bob = parties(FOUR_ROWS, 2)
        config = CountingConfig(p=8, s=0.4, agreement_band=0.05)
        est = estimate_confidence(
            alice, bob, frozenset({1}), frozenset({2}), config, np.random.default_rng(4)
        )
        assert est.error_bound > 0
        assert est.error_bound_sum > 0
        assert isinstance(est.numerator, SupportEstimate)
        assert isinstance(est.antecedent, SupportEstimate)
