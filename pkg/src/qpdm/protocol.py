"""Two-party protocol machinery: encryption keys, QRAM-backed party state,
the seven-step oracle construction, the controlled Grover iteration, and
qubit-transfer accounting.

One oracle call realizes, on the address register, the diagonal map

    |j>  ->  (-1)^(c(u(j))) |j>

where u is the responder's secret bijection on the address space and
c(i) = 1 exactly when transaction i contains the whole target itemset
(the AND of the two parties' containment flags). The call proceeds in
seven steps: the responder encrypts the travelling address register,
each party in turn loads its rows from QRAM, XORs its containment flag,
and erases the load by querying again; the initiator applies the phase
of the AND of the two flags (gated on an optional control qubit); the
erasures run in reverse and the responder undoes the encryption. Every
query / unquery pair is executed explicitly, and the call verifies at
exit that all auxiliary registers disentangled back to zero.

Register transfers happen in steps 1, 3, 6 and 7 and are logged on a
transcript as (n, n+1, n+1, n) qubits, 4n+2 per call. Transfers are
logged even when the control is zero everywhere: the physical protocol
sends the registers regardless of the control qubit's state.

The mirrored, responder-initiated protocol is the same code path with
the party arguments swapped; the party object's role decides which data
register and flag it drives, and the initiator's counterpart holds the
secret key.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import qsim
from .dataset import PartitionedView, TransactionDatabase

KEY_FAMILIES = ("bitflip", "modadd", "cyclic")

REGISTER_ORDER = (
    "counting",
    "address",
    "bob_data",
    "alice_data",
    "b_flag",
    "a_flag",
    "kick_ancilla",
)


@dataclass(frozen=True)
class EncryptionKey:
    """A secret bijection u on the n-bit address space.

    Families: bitflip u(j) = j XOR lam; modadd u(j) = j + lam mod 2^n;
    cyclic u(j1..jn) = j2..jn j1 iterated ``parameter`` times.
    All three are bijections by construction.
    """

    family: str
    parameter: int
    n: int

    def apply(self, j: int) -> int:
        if self.family == "bitflip":
            return j ^ self.parameter
        if self.family == "modadd":
            return (j + self.parameter) & ((1 << self.n) - 1)
        r = self.parameter % self.n
        mask = (1 << self.n) - 1
        return ((j << r) | (j >> (self.n - r))) & mask if r else j

    def invert(self, j: int) -> int:
        if self.family == "bitflip":
            return j ^ self.parameter
        if self.family == "modadd":
            return (j - self.parameter) & ((1 << self.n) - 1)
        r = self.parameter % self.n
        mask = (1 << self.n) - 1
        return ((j >> r) | (j << (self.n - r))) & mask if r else j


def make_key(family: str, parameter: int, n: int) -> EncryptionKey:
    if family not in KEY_FAMILIES:
        raise ValueError(f"unknown key family {family!r}")
    if n < 1:
        raise ValueError("address width must be at least 1")
    bound = n if family == "cyclic" else 1 << n
    if not 0 <= parameter < bound:
        raise ValueError(f"{family} parameter {parameter} outside [0, {bound})")
    return EncryptionKey(family, parameter, n)


def sample_key(family: str, n: int, rng: np.random.Generator) -> EncryptionKey:
    """Draw a key parameter uniformly from its family's range."""
    bound = n if family == "cyclic" else 1 << n
    return make_key(family, int(rng.integers(0, bound)), n)


def all_keys(family: str, n: int) -> list[EncryptionKey]:
    """Every key of one family at width n (enumerable at desk scale)."""
    bound = n if family == "cyclic" else 1 << n
    return [make_key(family, par, n) for par in range(bound)]


@dataclass(frozen=True)
class PartyState:
    """One party's handle: its view, its QRAM contents, optionally its key.

    The key is present only on the party acting as responder-encryptor for
    a given run; modules above the protocol never see key parameters.
    """

    role: str
    view: PartitionedView
    qram_memory: tuple[str, ...]
    key: EncryptionKey | None = None
    memory_ints: tuple[int, ...] = field(default=(), repr=False)

    def __post_init__(self):
        if not self.memory_ints:
            object.__setattr__(
                self, "memory_ints", tuple(int(cell, 2) for cell in self.qram_memory)
            )

    @property
    def address_width(self) -> int:
        return (len(self.qram_memory) - 1).bit_length()

    @property
    def data_width(self) -> int:
        return len(self.qram_memory[0])

    def with_key(self, key: EncryptionKey | None) -> "PartyState":
        return dataclasses.replace(self, key=key)


def build_qram(view: PartitionedView, n: int) -> PartyState:
    """Load a padded view into a party's QRAM, cell j = row j."""
    if len(view.rows) != 1 << n:
        raise ValueError(f"view has {len(view.rows)} rows, expected 2^{n}")
    return PartyState(view.role, view, tuple(view.rows))


@dataclass(frozen=True)
class TransferEvent:
    direction: str  # "alice_to_bob" | "bob_to_alice"
    qubits: int
    step: str  # step1 | step3 | step6 | step7

    def __post_init__(self):
        if self.direction not in ("alice_to_bob", "bob_to_alice"):
            raise ValueError(f"bad direction {self.direction!r}")
        if self.qubits < 1:
            raise ValueError("transfers carry at least one qubit")
        if self.step not in ("step1", "step3", "step6", "step7"):
            raise ValueError(f"bad step tag {self.step!r}")


@dataclass
class Transcript:
    """Ordered log of register transfers between the parties."""

    events: list[TransferEvent] = field(default_factory=list)

    def log(self, direction: str, qubits: int, step: str) -> None:
        self.events.append(TransferEvent(direction, qubits, step))

    def to_json(self) -> list[dict]:
        return [{"dir": e.direction, "qubits": e.qubits, "step": e.step} for e in self.events]


def transcript_total(transcript: Transcript) -> tuple[int, int]:
    """(total qubits sent, max qubits over any single oracle call).

    Events come in groups of four per oracle call; anything else is an
    accounting error.
    """
    events = transcript.events
    if len(events) % 4:
        raise ValueError(f"transcript has {len(events)} events, not a multiple of 4")
    total = sum(e.qubits for e in events)
    per_call = [
        sum(e.qubits for e in events[i : i + 4]) for i in range(0, len(events), 4)
    ]
    return total, max(per_call, default=0)


def oracle_layout(n: int, l: int, k: int, p: int = 0) -> qsim.RegisterLayout:
    """The canonical composite layout; zero-width counting register when p=0."""
    widths = {
        "counting": p,
        "address": n,
        "bob_data": k - l,
        "alice_data": l,
        "b_flag": 1,
        "a_flag": 1,
        "kick_ancilla": 1,
    }
    return qsim.RegisterLayout(tuple((name, widths[name]) for name in REGISTER_ORDER))


def oracle_call_events(initiator_role: str, n: int) -> tuple[TransferEvent, ...]:
    """The four transfers of one oracle call, in protocol order."""
    if initiator_role == "alice":
        out, back = "alice_to_bob", "bob_to_alice"
    else:
        out, back = "bob_to_alice", "alice_to_bob"
    return (
        TransferEvent(out, n, "step1"),
        TransferEvent(back, n + 1, "step3"),
        TransferEvent(out, n + 1, "step6"),
        TransferEvent(back, n, "step7"),
    )


def _party_registers(party: PartyState) -> tuple[str, str]:
    if party.role == "alice":
        return "alice_data", "a_flag"
    return "bob_data", "b_flag"


def _aux_mask(layout: qsim.RegisterLayout) -> int:
    mask = 0
    for name in ("bob_data", "alice_data", "b_flag", "a_flag", "kick_ancilla"):
        mask |= layout.mask(name)
    return mask


def run_oracle_u(
    state: qsim.SparseState,
    initiator: PartyState,
    responder: PartyState,
    z: frozenset,
    transcript: Transcript,
    control: int | None = None,
    postpone_unquery: bool = False,
    record: list | None = None,
) -> qsim.SparseState:
    """One oracle call: |j> -> (-1)^(c(u(j))) |j> on control=1 branches.

    Preconditions: all auxiliary registers (data, flags, ancilla) are zero
    on every basis label, z is non-empty, and the responder holds the key.
    ``postpone_unquery`` moves the initiator's first unquery from step 3 to
    step 5, saving two QRAM queries; the final state is identical either
    way. ``record``, if given, collects ("stepX", state) snapshots after
    each step for tracing.
    """
    z = frozenset(z)
    if not z:
        raise ValueError("Z must be non-empty")
    if initiator.role == responder.role:
        raise ValueError("initiator and responder must have distinct roles")
    key = responder.key
    if key is None:
        raise ValueError("responder holds no encryption key")
    layout = state.layout
    n = layout.width("address")
    if len(responder.qram_memory) != 1 << n or len(initiator.qram_memory) != 1 << n:
        raise ValueError("party QRAM size does not match the address register")
    k = initiator.view.width + responder.view.width
    if any(not 1 <= i <= k for i in z):
        raise ValueError(f"Z contains items outside 1..{k}")
    aux = _aux_mask(layout)
    if any(label & aux for label in state.amps):
        raise ValueError("auxiliary registers must be zero at oracle entry")

    init_items, init_off = initiator.view.item_part(z)
    resp_items, resp_off = responder.view.item_part(z)
    init_data, init_flag = _party_registers(initiator)
    resp_data, resp_flag = _party_registers(responder)
    init_fq = layout.qubit(init_flag)
    resp_fq = layout.qubit(resp_flag)
    events = oracle_call_events(initiator.role, n)

    def snap(tag):
        if record is not None:
            record.append((tag, state))

    # Step 1: the address register travels to the responder, who encrypts it.
    transcript.events.append(events[0])
    state = qsim.apply_permutation(state, "address", key.apply)
    snap("step1")

    # Step 2: responder loads its rows, marks containment of its part, erases.
    state = qsim.qram_query(state, "address", resp_data, responder.memory_ints)
    state = qsim.apply_membership_mark(state, resp_data, resp_fq, resp_items, resp_off)
    state = qsim.qram_query(state, "address", resp_data, responder.memory_ints)
    snap("step2")

    # Step 3: address + flag travel back; initiator does the same for its part.
    transcript.events.append(events[1])
    state = qsim.qram_query(state, "address", init_data, initiator.memory_ints)
    state = qsim.apply_membership_mark(state, init_data, init_fq, init_items, init_off)
    if not postpone_unquery:
        state = qsim.qram_query(state, "address", init_data, initiator.memory_ints)
    snap("step3")

    # Step 4: phase kickback of the AND of the two flags, gated on the control.
    state = qsim.apply_phase_and(state, init_fq, resp_fq, control=control)
    snap("step4")

    # Step 5: initiator erases its flag (and, in the postponed variant, its
    # still-loaded data register).
    if postpone_unquery:
        state = qsim.apply_membership_mark(state, init_data, init_fq, init_items, init_off)
        state = qsim.qram_query(state, "address", init_data, initiator.memory_ints)
    else:
        state = qsim.qram_query(state, "address", init_data, initiator.memory_ints)
        state = qsim.apply_membership_mark(state, init_data, init_fq, init_items, init_off)
        state = qsim.qram_query(state, "address", init_data, initiator.memory_ints)
    snap("step5")

    # Step 6: back to the responder, who erases its flag the same way.
    transcript.events.append(events[2])
    state = qsim.qram_query(state, "address", resp_data, responder.memory_ints)
    state = qsim.apply_membership_mark(state, resp_data, resp_fq, resp_items, resp_off)
    state = qsim.qram_query(state, "address", resp_data, responder.memory_ints)
    snap("step6")

    # Step 7: responder undoes the encryption and returns the register.
    state = qsim.apply_permutation(state, "address", key.invert)
    transcript.events.append(events[3])
    snap("step7")

    if any(label & aux for label in state.amps):
        raise qsim.SimulationError("auxiliary registers failed to disentangle")
    return state


def reference_phase_oracle(
    db: TransactionDatabase, z: frozenset, u: Callable[[int], int]
) -> np.ndarray:
    """Directly constructed diagonal of the oracle: entry j = (-1)^(c(u(j))).

    c(i) = 1 iff transaction i contains all of z; padding rows are all-zero
    and never marked for a non-empty z. Independent of the protocol path.
    """
    z = frozenset(z)
    if not z:
        raise ValueError("Z must be non-empty")
    n_rows = db.n_transactions
    if n_rows & (n_rows - 1):
        raise ValueError("database must be padded to a power of two")
    signs = np.ones(n_rows, dtype=np.int8)
    for j in range(n_rows):
        row = db.rows[u(j)]
        if all(row[i - 1] == "1" for i in z):
            signs[j] = -1
    return signs


def controlled_grover(
    state: qsim.SparseState,
    initiator: PartyState,
    responder: PartyState,
    z: frozenset,
    control: int | None,
    transcript: Transcript,
) -> qsim.SparseState:
    """One Grover iteration G = -(W U0 W) U on the address register.

    With a control qubit, the oracle's phase and U0 are gated on it and the
    global -1 becomes a phase on the control; the Hadamard walls run
    unconditioned (they cancel on control=0 branches). With control=None
    this is plain G including a true global phase of -1.
    """
    state = run_oracle_u(state, initiator, responder, z, transcript, control=control)
    state = qsim.apply_w(state, "address")
    state = qsim.apply_u0(state, "address", control=control)
    state = qsim.apply_w(state, "address")
    return qsim.apply_phase_flip(state, control)
