"""Quantum counting over the two-party oracle, the two-sided agreement rule
for accepting a support value, and confidence estimation.

A count is phase estimation of the Grover iteration built from one party's
initiated oracle: counting and address registers go to uniform
superposition, counting qubit i controls 2^i Grover iterations, the
counting register goes through the inverse QFT and is measured, and the
readout f becomes the estimate sin^2(pi f / P) of the marked fraction of
the padded address space, rescaled to the database's real row count.

Two execution methods are provided and pinned to each other by tests:

* "statevector" carries the full counting-register state through every
  controlled Grover call, exactly as the circuit reads. It is exponential
  in the counting width and meant for validation at small sizes.
* "trajectory" factors the identical circuit through the walk states
  G^m |uniform>: the controlled iterations entangle the counting register
  with nothing but the walk index, so the post-QFT readout distribution
  is recovered exactly by a length-P Fourier transform over the walk.
  The oracle's diagonal is taken from one full seven-step protocol
  execution per count (which also re-checks disentanglement); the
  remaining iterations reuse it.

Both methods log the same transcript: one four-transfer group per logical
oracle call, P-1 groups per count, and both consume exactly one uniform
draw per measurement, so seeded runs agree draw-for-draw across methods.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import qsim
from .protocol import (
    KEY_FAMILIES,
    PartyState,
    Transcript,
    controlled_grover,
    oracle_call_events,
    oracle_layout,
    run_oracle_u,
    sample_key,
)
class EstimationError(RuntimeError):
    """An estimate is unusable (too rare an antecedent, no agreement)."""


@dataclass(frozen=True)
class CountingConfig:
    """Counting width, preset support threshold, and the agreement rule.

    P = 2^p counting values; a round's two estimates are accepted when they
    differ by less than agreement_band * s.
    """

    p: int
    s: float
    agreement_band: float = 0.01
    max_rounds: int = 20
    key_family: str = "bitflip"

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("counting width p must be >= 1")
        if not 0 < self.s < 1:
            raise ValueError("support threshold s must lie in (0, 1)")
        if self.agreement_band <= 0:
            raise ValueError("agreement band must be positive")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.key_family not in KEY_FAMILIES:
            raise ValueError(f"unknown key family {self.key_family!r}")

    @property
    def P(self) -> int:
        return 1 << self.p


def default_counting_width(s: float) -> int:
    """p with 2^p >= 2000/s, the recommended precision for threshold s."""
    return max(1, math.ceil(math.log2(2000.0 / s)))


@dataclass(frozen=True)
class SupportEstimate:
    """An accepted (or exhausted) support value with its error bound."""

    value: float | Fraction
    error_bound: float
    rounds_used: int
    s1: float
    s2: float
    accepted: bool


@dataclass(frozen=True)
class ConfidenceEstimate:
    """Estimated confidence with first-order and plain-sum error bounds."""

    value: float
    error_bound: float
    error_bound_sum: float
    numerator: SupportEstimate
    antecedent: SupportEstimate
    accepted: bool


def phase_readout(f: int, P: int) -> float:
    """Marked-fraction estimate from the counting readout f."""
    return math.sin(math.pi * f / P) ** 2


def estimate_error_bound(value: float, P: int) -> float:
    """Per-count error bound 2*pi*sqrt(value)/P + pi^2/P^2."""
    return 2 * math.pi * math.sqrt(max(value, 0.0)) / P + math.pi**2 / P**2


def _resolve_parties(initiator: str, alice: PartyState, bob: PartyState):
    if initiator == "alice":
        return alice, bob
    if initiator == "bob":
        return bob, alice
    raise ValueError(f"initiator must be 'alice' or 'bob', got {initiator!r}")


def _resolve_method(method: str) -> str:
    # "auto" is the trajectory method: exact, and the only one that meets
    # the runtime targets at recommended P. Statevector is a validation
    # opt-in, exponential in the counting width.
    if method == "auto":
        return "trajectory"
    if method in ("statevector", "trajectory"):
        return method
    raise ValueError(f"unknown counting method {method!r}")


def _layout_for(init: PartyState, resp: PartyState, p: int):
    if init.address_width != resp.address_width:
        raise ValueError("parties are built over different address spaces")
    alice_view = init.view if init.role == "alice" else resp.view
    bob_view = resp.view if init.role == "alice" else init.view
    n = init.address_width
    k = alice_view.width + bob_view.width
    return oracle_layout(n, alice_view.split_point, k, p=p), n


def _oracle_diagonal(init: PartyState, resp: PartyState, z: frozenset) -> np.ndarray:
    """Signs of the oracle, extracted from one full protocol execution on the
    uniform address state (every query, mark and erasure actually runs)."""
    layout, n = _layout_for(init, resp, p=0)
    st = qsim.apply_w(qsim.prepare_basis(layout), "address")
    out = run_oracle_u(st, init, resp, z, Transcript())
    off = layout.offset("address")
    signs = np.empty(1 << n, dtype=float)
    for label, a_in in st.amps.items():
        ratio = out.amps[label] / a_in
        if abs(abs(ratio) - 1.0) > 1e-9 or abs(ratio.imag) > 1e-9:
            raise qsim.SimulationError(f"oracle output is not a sign flip: {ratio!r}")
        signs[(label >> off) & ((1 << n) - 1)] = 1.0 if ratio.real > 0 else -1.0
    return signs


def _trajectory_distribution(
    init: PartyState,
    resp: PartyState,
    z: frozenset,
    config: CountingConfig,
    transcript: Transcript | None,
) -> np.ndarray:
    signs = _oracle_diagonal(init, resp, z)
    m = len(signs)
    P = config.P
    events = oracle_call_events(init.role, init.address_width)
    walk = np.empty((P, m), dtype=complex)
    phi = np.full(m, m**-0.5, dtype=complex)
    walk[0] = phi
    log = transcript.events.extend if transcript is not None else None
    for t in range(1, P):
        if log is not None:
            log(events)
        v = signs * phi
        phi = 2.0 * v.mean() - v  # G phi = (2|u><u| - I) (signs . phi)
        walk[t] = phi
    amps = np.fft.fft(walk, axis=0) / P
    probs = np.abs(amps) ** 2 @ np.ones(m)
    if abs(probs.sum() - 1.0) > 1e-9:
        raise qsim.SimulationError("counting distribution lost normalization")
    return probs


def _statevector_prepared(
    init: PartyState,
    resp: PartyState,
    z: frozenset,
    config: CountingConfig,
    transcript: Transcript | None,
) -> qsim.SparseState:
    layout, _ = _layout_for(init, resp, p=config.p)
    transcript = transcript if transcript is not None else Transcript()
    st = qsim.prepare_basis(layout)
    st = qsim.apply_w(st, "counting")
    st = qsim.apply_w(st, "address")
    for i in range(config.p):
        ctrl = layout.qubit("counting", i)
        for _ in range(1 << i):
            st = controlled_grover(st, init, resp, z, ctrl, transcript)
    return qsim.inverse_qft(st, "counting")


def counting_distribution(
    initiator: str,
    alice: PartyState,
    bob: PartyState,
    z: frozenset,
    config: CountingConfig,
    transcript: Transcript | None = None,
    method: str = "auto",
) -> np.ndarray:
    """Exact probability vector over the counting readout f = 0 .. P-1."""
    init, resp = _resolve_parties(initiator, alice, bob)
    method = _resolve_method(method)
    if method == "trajectory":
        return _trajectory_distribution(init, resp, z, config, transcript)
    st = _statevector_prepared(init, resp, z, config, transcript)
    probs = np.zeros(config.P)
    for label, a in st.amps.items():
        probs[st.layout.extract(label, "counting")] += abs(a) ** 2
    return probs


def _sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    r = rng.random()
    acc = 0.0
    for f, p in enumerate(probs):
        acc += p
        if r < acc:
            return f
    return len(probs) - 1


def quantum_count(
    initiator: str,
    alice: PartyState,
    bob: PartyState,
    z: frozenset,
    config: CountingConfig,
    rng: np.random.Generator,
    transcript: Transcript | None = None,
    method: str = "auto",
) -> float:
    """One count: run phase estimation, measure, and return the support
    estimate rescaled from the padded space to the real row count."""
    init, resp = _resolve_parties(initiator, alice, bob)
    resolved = _resolve_method(method)
    if resolved == "statevector":
        st = _statevector_prepared(init, resp, z, config, transcript)
        f = qsim.measure_register(st, "counting", rng).value
    else:
        probs = _trajectory_distribution(init, resp, z, config, transcript)
        f = _sample_index(probs, rng)
    raw = phase_readout(f, config.P)
    scale = (1 << init.address_width) / init.view.original_count
    return min(1.0, raw * scale)


def joint_support(
    alice: PartyState,
    bob: PartyState,
    z: frozenset,
    config: CountingConfig,
    rng: np.random.Generator,
    transcript: Transcript | None = None,
    method: str = "auto",
) -> SupportEstimate:
    """Alternate Alice- and Bob-initiated counts with fresh keys each round
    until the two estimates agree within agreement_band * s.

    On exhaustion the last round's estimates are reported with
    accepted=False; the caller decides what to do with them.
    """
    if alice.address_width != bob.address_width:
        raise ValueError("parties are built over different address spaces")
    n = alice.address_width
    band = config.agreement_band * config.s
    s1 = s2 = math.nan
    rounds = 0
    for rounds in range(1, config.max_rounds + 1):
        bob_keyed = bob.with_key(sample_key(config.key_family, n, rng))
        s1 = quantum_count("alice", alice, bob_keyed, z, config, rng, transcript, method)
        alice_keyed = alice.with_key(sample_key(config.key_family, n, rng))
        s2 = quantum_count("bob", alice_keyed, bob, z, config, rng, transcript, method)
        if abs(s1 - s2) < band:
            value = (s1 + s2) / 2
            return SupportEstimate(
                value, estimate_error_bound(value, config.P), rounds, s1, s2, True
            )
    value = (s1 + s2) / 2
    return SupportEstimate(value, estimate_error_bound(value, config.P), rounds, s1, s2, False)


def estimate_confidence(
    alice: PartyState,
    bob: PartyState,
    x: frozenset,
    y: frozenset,
    config: CountingConfig,
    rng: np.random.Generator,
    transcript: Transcript | None = None,
    method: str = "auto",
) -> ConfidenceEstimate:
    """Estimated conf(X => Y) = supp(X u Y) / supp(X) from two joint counts.

    The reported error_bound is the first-order quotient propagation
    err_num / supp(X) + err_den * supp(X u Y) / supp(X)^2; the plain sum of
    the two support bounds is reported alongside as error_bound_sum.
    """
    x, y = frozenset(x), frozenset(y)
    if not x or not y:
        raise ValueError("X and Y must be non-empty")
    if x & y:
        raise ValueError("X and Y must be disjoint")
    antecedent = joint_support(alice, bob, x, config, rng, transcript, method)
    if not antecedent.accepted:
        raise EstimationError("antecedent support estimate was not accepted")
    if antecedent.value <= antecedent.error_bound:
        raise EstimationError(
            "antecedent too rare: support estimate does not exceed its error bound"
        )
    numerator = joint_support(alice, bob, x | y, config, rng, transcript, method)
    value = numerator.value / antecedent.value
    bound = (
        numerator.error_bound / antecedent.value
        + antecedent.error_bound * numerator.value / antecedent.value**2
    )
    return ConfidenceEstimate(
        value=value,
        error_bound=bound,
        error_bound_sum=numerator.error_bound + antecedent.error_bound,
        numerator=numerator,
        antecedent=antecedent,
        accepted=numerator.accepted,
    )
