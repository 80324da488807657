"""Sparse state-vector engine for the two-party mining protocol.

A state lives over a fixed composite register layout and is stored as a map
from composite basis labels (plain Python ints) to complex amplitudes. The
engine provides exactly the primitives the protocol needs, and they fall in
two classes:

* signed basis permutations: encryption permutations, QRAM queries (XOR
  loads, hence self-inverse), membership marks, the zero reflection, phase
  kickback. These never grow the amplitude map.
* spreading operations: the Hadamard wall on a register and the inverse QFT.
  Only these can enlarge the map, by at most a factor of 2^(register width).

Operations are pure: each returns a fresh SparseState and leaves its input
untouched. Amplitudes with magnitude below ``PRUNE_EPS`` are dropped after
spreading operations to bound floating-point dust.

Conventions. Registers are declared most-significant first; within a
register the content is read as an unsigned integer, and "qubit i" of a
register is the bit of significance 2^i. The inverse QFT is the adjoint of
F: |m> -> sum_f exp(+2*pi*i*m*f/P)|f> / sqrt(P); the counting readout is
invariant under the opposite sign choice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

PRUNE_EPS = 1e-14
NORM_TOL = 1e-10


class SimulationError(RuntimeError):
    """Internal consistency violation (norm drift, failed disentanglement)."""


@dataclass(frozen=True)
class RegisterLayout:
    """Named bit fields inside a composite basis label.

    ``registers`` lists (name, width) pairs, first entry occupying the most
    significant bits. Zero-width registers are allowed and act as inert
    placeholders so a single canonical ordering can serve every run.
    """

    registers: tuple[tuple[str, int], ...]
    _offsets: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        offsets = {}
        total = sum(w for _, w in self.registers)
        pos = total
        for name, width in self.registers:
            if width < 0:
                raise ValueError(f"register {name!r} has negative width")
            if name in offsets:
                raise ValueError(f"duplicate register {name!r}")
            pos -= width
            offsets[name] = pos
        object.__setattr__(self, "_offsets", offsets)

    @property
    def total_width(self) -> int:
        return sum(w for _, w in self.registers)

    def width(self, name: str) -> int:
        for reg, w in self.registers:
            if reg == name:
                return w
        raise ValueError(f"unknown register {name!r}")

    def offset(self, name: str) -> int:
        if name not in self._offsets:
            raise ValueError(f"unknown register {name!r}")
        return self._offsets[name]

    def mask(self, name: str) -> int:
        return ((1 << self.width(name)) - 1) << self.offset(name)

    def qubit(self, name: str, i: int = 0) -> int:
        """Absolute bit position of qubit i (significance 2^i) of a register."""
        if not 0 <= i < self.width(name):
            raise ValueError(f"register {name!r} has no qubit {i}")
        return self.offset(name) + i

    def extract(self, label: int, name: str) -> int:
        return (label >> self.offset(name)) & ((1 << self.width(name)) - 1)

    def replace(self, label: int, name: str, value: int) -> int:
        w = self.width(name)
        if not 0 <= value < 1 << w:
            raise ValueError(f"value {value} does not fit register {name!r}")
        return (label & ~self.mask(name)) | (value << self.offset(name))


@dataclass
class SparseState:
    """Map from composite basis labels to complex amplitudes."""

    layout: RegisterLayout
    amps: dict[int, complex]

    def norm_sq(self) -> float:
        return sum(abs(a) ** 2 for a in self.amps.values())

    def check_norm(self, tol: float = NORM_TOL) -> None:
        if abs(self.norm_sq() - 1.0) > tol:
            raise SimulationError(f"state norm drifted: |amps|^2 = {self.norm_sq()!r}")

    def copy(self) -> "SparseState":
        return SparseState(self.layout, dict(self.amps))

    def dump(self) -> str:
        """One line per basis label: binary label grouped by register, then
        real and imaginary amplitude parts at 17 significant digits."""
        lines = []
        for label in sorted(self.amps):
            groups = [
                format(self.extract(label, name), f"0{w}b")
                for name, w in self.layout.registers
                if w > 0
            ]
            a = self.amps[label]
            lines.append(f"{' '.join(groups)} {a.real:.17g} {a.imag:.17g}")
        return "\n".join(lines)

    def extract(self, label: int, name: str) -> int:
        return self.layout.extract(label, name)


@dataclass(frozen=True)
class MeasurementOutcome:
    value: int
    probability: float
    post_state: SparseState


def max_deviation(a: SparseState, b: SparseState) -> float:
    """Largest amplitude difference between two states over all basis labels."""
    dev = 0.0
    for label in a.amps.keys() | b.amps.keys():
        dev = max(dev, abs(a.amps.get(label, 0j) - b.amps.get(label, 0j)))
    return dev


def prepare_basis(layout: RegisterLayout, label: int = 0) -> SparseState:
    """Single-amplitude state |label>."""
    if not 0 <= label < 1 << layout.total_width:
        raise ValueError(f"label {label} outside {layout.total_width}-bit space")
    return SparseState(layout, {label: 1.0 + 0j})


def apply_w(state: SparseState, register: str) -> SparseState:
    """Hadamard on every qubit of a register (the wall W = H^(x)w)."""
    off = state.layout.offset(register)
    width = state.layout.width(register)
    inv = 1.0 / math.sqrt(2.0)
    amps = state.amps
    for q in range(off, off + width):
        mask = 1 << q
        new: dict[int, complex] = {}
        for label, a in amps.items():
            c = a * inv
            lo = label & ~mask
            hi = label | mask
            new[lo] = new.get(lo, 0j) + c
            new[hi] = new.get(hi, 0j) + (-c if label & mask else c)
        amps = new
    amps = {l: a for l, a in amps.items() if abs(a) >= PRUNE_EPS}
    return SparseState(state.layout, amps)


def apply_u0(state: SparseState, register: str, control: int | None = None) -> SparseState:
    """Reflection about the all-zero register content: negate amplitudes with
    register content 0, on branches where the control qubit (if any) is 1."""
    rmask = state.layout.mask(register)
    if control is not None and rmask >> control & 1:
        raise ValueError("control qubit must lie outside the reflected register")
    cmask = 0 if control is None else 1 << control
    new = {}
    for label, a in state.amps.items():
        if label & rmask == 0 and (cmask == 0 or label & cmask):
            a = -a
        new[label] = a
    return SparseState(state.layout, new)


def apply_permutation(state: SparseState, register: str, u: Callable[[int], int]) -> SparseState:
    """Replace register content j by u(j) on every basis label.

    u must be a bijection on the register's value range; the caller (key
    constructor) guarantees that, but collisions are still trapped.
    """
    off = state.layout.offset(register)
    width = state.layout.width(register)
    vmask = (1 << width) - 1
    shifted = vmask << off
    new = {}
    for label, a in state.amps.items():
        uj = u((label >> off) & vmask)
        if not 0 <= uj <= vmask:
            raise ValueError(f"permutation output {uj} does not fit register {register!r}")
        new[(label & ~shifted) | (uj << off)] = a
    if len(new) != len(state.amps):
        raise SimulationError("permutation is not a bijection on the register")
    return SparseState(state.layout, new)


def _memory_ints(memory: Sequence, width: int, count: int) -> list[int]:
    if len(memory) != count:
        raise ValueError(f"memory must have {count} cells, got {len(memory)}")
    cells = []
    for cell in memory:
        if isinstance(cell, str):
            if len(cell) != width or set(cell) - {"0", "1"}:
                raise ValueError(f"memory cell {cell!r} is not a {width}-bit string")
            cells.append(int(cell, 2) if width else 0)
        else:
            cell = int(cell)
            if not 0 <= cell < 1 << width:
                raise ValueError(f"memory cell {cell} does not fit {width} bits")
            cells.append(cell)
    return cells


def qram_query(state: SparseState, address: str, data: str, memory: Sequence) -> SparseState:
    """XOR the addressed memory cell into the data register (self-inverse).

    On every basis label with address content j, the data register content
    is XORed with memory[j]; querying twice therefore erases the load.
    """
    a_off = state.layout.offset(address)
    a_mask = (1 << state.layout.width(address)) - 1
    d_off = state.layout.offset(data)
    cells = _memory_ints(memory, state.layout.width(data), 1 << state.layout.width(address))
    new = {}
    for label, a in state.amps.items():
        new[label ^ (cells[(label >> a_off) & a_mask] << d_off)] = a
    return SparseState(state.layout, new)


def apply_membership_mark(
    state: SparseState,
    data: str,
    flag: int,
    zpart: frozenset,
    offset: int = 0,
) -> SparseState:
    """XOR into the flag qubit whether the data register contains zpart.

    Containment means a 1 bit at every position of zpart (positions are
    1-based item indices, shifted down by ``offset`` into the register's
    bitstring). An empty zpart is vacuously contained, so the flag toggles
    on every label. Self-inverse.
    """
    d_off = state.layout.offset(data)
    width = state.layout.width(data)
    if d_off <= flag < d_off + width:
        raise ValueError("flag qubit must lie outside the data register")
    sel = 0
    for pos in zpart:
        q = pos - offset
        if not 1 <= q <= width:
            raise ValueError(f"position {pos} (offset {offset}) outside data register of width {width}")
        sel |= 1 << (width - q)
    vmask = (1 << width) - 1
    fmask = 1 << flag
    new = {}
    for label, a in state.amps.items():
        if (label >> d_off) & vmask & sel == sel:
            label ^= fmask
        new[label] = a
    return SparseState(state.layout, new)


def apply_phase_and(state: SparseState, a: int, b: int, control: int | None = None) -> SparseState:
    """Multiply each amplitude by (-1)^(bit_a AND bit_b), gated on the control.

    This is the Toffoli-onto-|-> phase kickback applied directly as a phase;
    the ancilla never entangles, so the external behaviour is identical.
    """
    if a == b or control in (a, b):
        raise ValueError("phase qubits must be distinct")
    amask = 1 << a
    bmask = 1 << b
    cmask = 0 if control is None else 1 << control
    new = {}
    for label, amp in state.amps.items():
        if label & amask and label & bmask and (cmask == 0 or label & cmask):
            amp = -amp
        new[label] = amp
    return SparseState(state.layout, new)


def apply_phase_flip(state: SparseState, qubit: int | None = None) -> SparseState:
    """Negate amplitudes where the qubit is 1; with no qubit, a global -1."""
    if qubit is None:
        return SparseState(state.layout, {l: -a for l, a in state.amps.items()})
    qmask = 1 << qubit
    return SparseState(
        state.layout,
        {l: (-a if l & qmask else a) for l, a in state.amps.items()},
    )


def inverse_qft(state: SparseState, register: str) -> SparseState:
    """Inverse discrete Fourier transform of size 2^width on one register:
    |m> -> sum_f exp(-2*pi*i*m*f/P) |f> / sqrt(P)."""
    off = state.layout.offset(register)
    width = state.layout.width(register)
    size = 1 << width
    shifted = (size - 1) << off
    groups: dict[int, np.ndarray] = {}
    for label, a in state.amps.items():
        rest = label & ~shifted
        vec = groups.get(rest)
        if vec is None:
            vec = groups[rest] = np.zeros(size, dtype=complex)
        vec[(label >> off) & (size - 1)] = a
    scale = 1.0 / math.sqrt(size)
    new = {}
    for rest, vec in groups.items():
        out = np.fft.fft(vec) * scale
        for f in range(size):
            amp = complex(out[f])
            if abs(amp) >= PRUNE_EPS:
                new[rest | (f << off)] = amp
    return SparseState(state.layout, new)


def measure_register(state: SparseState, register: str, rng: np.random.Generator) -> MeasurementOutcome:
    """Projective measurement of one register in the computational basis.

    Exactly one uniform draw is consumed; outcomes are walked in ascending
    value order, so results are reproducible for a given rng state.
    """
    probs: dict[int, float] = {}
    for label, a in state.amps.items():
        v = state.layout.extract(label, register)
        probs[v] = probs.get(v, 0.0) + abs(a) ** 2
    total = sum(probs.values())
    if abs(total - 1.0) > 1e-8:
        raise SimulationError(f"measurement on unnormalized state (norm^2 = {total!r})")
    r = rng.random() * total
    acc = 0.0
    values = sorted(probs)
    value = values[-1]
    for v in values:
        acc += probs[v]
        if r < acc:
            value = v
            break
    p = probs[value]
    scale = 1.0 / math.sqrt(p)
    post = {
        label: a * scale
        for label, a in state.amps.items()
        if state.layout.extract(label, register) == value
    }
    return MeasurementOutcome(value, p, SparseState(state.layout, post))
