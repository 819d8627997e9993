"""Noisy memory-experiment circuits in stim's text format.

Each CNOT of the extraction schedule is compiled to the native long-range CZ
conjugated by Hadamards on its target. Noise is attached per gate from its
routed one-way count ``r``; spectators pick up idle noise for the pass
duration. A small symbolic Pauli-frame pass checks that the noiseless circuit
has deterministic detectors and observables without needing stim.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .code import BBCode, Gate, Qubit, SyndromeSchedule, build_schedule
from .gf2 import bits
from .layout import TorusLayout
from .noise import DEFAULT_PARAMS, HardwareParams, NoiseBreakdown, gate_time, p2q, p2q_sws
from .routing import RoutedPass, pass_duration

MEASURING = {"M": "Z", "MX": "X", "HERALDED_ERASE": None}
ANNOTATIONS = ("DETECTOR", "OBSERVABLE_INCLUDE", "TICK", "QUBIT_COORDS")


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Instruction:
    name: str
    targets: tuple[int, ...] = ()
    args: tuple[float, ...] = ()

    def records(self) -> int:
        return len(self.targets) if self.name in MEASURING else 0


def _fmt(x: float) -> str:
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


@dataclass
class NoisyCircuit:
    """Instruction list with detectors and observables as absolute record indices."""

    num_qubits: int
    instructions: list[Instruction] = field(default_factory=list)
    qubit_map: dict[str, int] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)
    cycle_starts: list[int] = field(default_factory=list)  # instruction index of each cycle start
    num_records: int = 0

    def append(self, name: str, targets: Iterable[int] = (), args: Iterable[float] = ()) -> None:
        inst = Instruction(name, tuple(targets), tuple(float(a) for a in args))
        if inst.name not in ANNOTATIONS and not inst.targets:
            return
        if inst.name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
            if any(not 0 <= rec < self.num_records for rec in inst.targets):
                raise CircuitError("annotation references a missing measurement")
        elif any(not 0 <= q < self.num_qubits for q in inst.targets):
            raise CircuitError(f"qubit index out of range in {inst.name}")
        self.num_records += inst.records()
        self.instructions.append(inst)

    def measure(self, name: str, targets: Sequence[int]) -> list[int]:
        """Append a measurement and return the absolute record index per target."""
        first = self.num_records
        self.append(name, targets)
        return list(range(first, first + len(targets)))

    @property
    def detectors(self) -> list[tuple[int, ...]]:
        return [i.targets for i in self.instructions if i.name == "DETECTOR"]

    @property
    def observables(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, tuple[int, ...]] = {}
        for i in self.instructions:
            if i.name == "OBSERVABLE_INCLUDE":
                k = int(i.args[0])
                out[k] = out.get(k, ()) + i.targets
        return out

    def count(self, name: str) -> int:
        return sum(len(i.targets) for i in self.instructions if i.name == name)

    def to_stim(self) -> str:
        lines = [f"# {k}: {v}" for k, v in sorted(self.metadata.items())]
        seen = 0
        for inst in self.instructions:
            args = f"({', '.join(_fmt(a) for a in inst.args)})" if inst.args else ""
            if inst.name in ("DETECTOR", "OBSERVABLE_INCLUDE"):
                tgt = " ".join(f"rec[{rec - seen}]" for rec in inst.targets)
            else:
                tgt = " ".join(str(t) for t in inst.targets)
            lines.append(f"{inst.name}{args} {tgt}".rstrip())
            seen += inst.records()
        return "\n".join(lines) + "\n"


# --- noise attachment -------------------------------------------------------------

def _prob(p: float) -> float:
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise CircuitError(f"probability {p} out of range")
    return p


def attach_gate_noise(check: int, data: int, breakdown: NoiseBreakdown, detect: bool) -> list[Instruction]:
    """Noise after one SWS gate; ``check`` is the routed (ctrl) side, ``data`` the resident (trgt) side."""
    out = []

    def add(name, targets, p):
        if _prob(p) > 0:
            out.append(Instruction(name, tuple(targets), (p,)))

    add("X_ERROR", [check], breakdown.pX_ctrl)
    add("Z_ERROR", [check], breakdown.pZ_ctrl)
    add("X_ERROR", [data], breakdown.pX_trgt)
    add("Z_ERROR", [data], breakdown.pZ_trgt)
    if detect:
        add("HERALDED_ERASE", [check], breakdown.p_eras_ctrl)
        add("HERALDED_ERASE", [data], breakdown.p_eras_trgt)
    else:
        add("DEPOLARIZE2", [check, data], breakdown.p_lost_ctrl + breakdown.p_lost_trgt)
    return out


def emitted_probability(fragment: Iterable[Instruction]) -> float:
    return math.fsum(i.args[0] for i in fragment)


def _interleave(fragments: Sequence[Sequence[Instruction]]) -> list[Instruction]:
    """Slot-major merge of per-gate fragments; adjacent same-channel entries fuse."""
    out: list[Instruction] = []
    depth = max((len(f) for f in fragments), default=0)
    for slot in range(depth):
        for frag in fragments:
            if slot >= len(frag):
                continue
            inst = frag[slot]
            if out and out[-1].name == inst.name and out[-1].args == inst.args:
                out[-1] = Instruction(inst.name, out[-1].targets + inst.targets, inst.args)
            else:
                out.append(inst)
    return out


# --- detectors --------------------------------------------------------------------

@dataclass(frozen=True)
class DetectorPlan:
    """Record bookkeeping shared by the emitter and the detector builder."""

    basis: str
    cycles: int
    x_records: list[list[int]]  # per cycle, per X check
    z_records: list[list[int]]
    data_records: list[int]


def build_detectors_and_observables(code: BBCode, plan: DetectorPlan) -> tuple[list[tuple[int, ...]], list[tuple[int, ...]]]:
    """First-round, round-difference and final-readout detectors plus observables."""
    same = plan.z_records if plan.basis == "Z" else plan.x_records
    detectors: list[tuple[int, ...]] = []
    for c in range(plan.cycles):
        if c == 0:
            detectors.extend((rec,) for rec in same[0])
            continue
        for prev, cur in zip(plan.z_records[c - 1], plan.z_records[c]):
            detectors.append((prev, cur))
        for prev, cur in zip(plan.x_records[c - 1], plan.x_records[c]):
            detectors.append((prev, cur))
    checks = code.hz if plan.basis == "Z" else code.hx
    for row, last in zip(checks.rows, same[-1]):
        detectors.append(tuple(plan.data_records[j] for j in bits(row)) + (last,))
    xl, zl = code.logicals
    logicals = zl if plan.basis == "Z" else xl
    observables = [tuple(plan.data_records[j] for j in bits(v)) for v in logicals]
    return detectors, observables


# --- emission ---------------------------------------------------------------------

def _gate_breakdown(r: int, params: HardwareParams, impl: str, detect: bool) -> NoiseBreakdown | float:
    if impl == "sws":
        return p2q_sws(r, params, detect)
    return p2q(r, params, impl, detect)


def _decay(t: float, life: float) -> float:
    return -math.expm1(-t / life)


def params_hash(params: HardwareParams) -> str:
    return hashlib.sha256(params.dumps().encode()).hexdigest()[:16]


def emit_memory_experiment(
    code: BBCode,
    layout: TorusLayout | None,
    routing: Sequence[RoutedPass] | None,
    params: HardwareParams = DEFAULT_PARAMS,
    impl: str = "sws",
    detect: bool = True,
    cycles: int = 1,
    basis: str = "Z",
    noiseless: bool = False,
    seed: int = 0,
    schedule: SyndromeSchedule | None = None,
) -> tuple[NoisyCircuit, dict]:
    """Build the circuit and its JSON-ready manifest.

    ``routing`` supplies the one-way count of every gate; it must cover the
    seven passes of ``schedule`` gate for gate.
    """
    if basis not in ("X", "Z"):
        raise CircuitError(f"basis must be 'X' or 'Z', got {basis!r}")
    if cycles < 1:
        raise CircuitError("need at least one cycle")
    schedule = schedule or build_schedule(code)
    if routing is None or len(routing) != len(schedule):
        raise CircuitError("routing missing or does not match the schedule")
    for routed, pass_ in zip(routing, schedule):
        if len(routed.routes) != len(pass_.gates) or any(r.gate != g for r, g in zip(routed.routes, pass_.gates)):
            raise CircuitError(f"routing of pass {pass_.index} does not match the schedule")

    n, half = code.n, code.half
    circ = NoisyCircuit(2 * n)
    index = code.qubit_index
    checks = {t: [index(Qubit(t, a)) for a in code.monomials()] for t in ("X", "Z")}
    data = list(range(n))
    roles = {q: "trgt" for q in data} | {q: "ctrl" for q in checks["X"] + checks["Z"]}
    for q in range(2 * n):
        circ.qubit_map[str(code.qubit_at(q).kind) + str(code.qubit_at(q).label)] = q
    circ.metadata = {"code": code.name, "params": params_hash(params), "seed": seed, "impl": impl,
                     "detect": detect, "cycles": cycles, "basis": basis, "noiseless": noiseless}

    if layout is not None:
        for q in range(2 * n):
            c, r = layout.placement[code.qubit_at(q)]
            circ.append("QUBIT_COORDS", [q], (c, r))

    def p_role(q: int, attr: str) -> float:
        return 0.0 if noiseless else getattr(params, f"{attr}_{roles[q]}")

    def idle(qubits: Sequence[int], t: float) -> None:
        if noiseless or impl != "sws" or t <= 0:
            return
        for role in ("ctrl", "trgt"):
            group = [q for q in qubits if roles[q] == role]
            circ.append("X_ERROR", group, (_decay(t, getattr(params, f"Tbitflip_dr_{role}")),))
            circ.append("Z_ERROR", group, (_decay(t, getattr(params, f"Tphi_dr_{role}")),))

    def single_qubit_noise(qubits: Sequence[int]) -> None:
        for role in ("ctrl", "trgt"):
            group = [q for q in qubits if roles[q] == role]
            p = p_role(group[0], "p_1q") if group else 0.0
            if p > 0:
                circ.append("DEPOLARIZE1", group, (p,))

    def measure(name: str, qubits: Sequence[int]) -> list[int]:
        flip = "X_ERROR" if name == "M" else "Z_ERROR"
        for role in ("ctrl", "trgt"):
            group = [q for q in qubits if roles[q] == role]
            p = p_role(group[0], "p_meas") if group else 0.0
            if p > 0:
                circ.append(flip, group, (p,))
        return circ.measure(name, qubits)

    manifest_gates = []
    circ.append("R" if basis == "Z" else "RX", data)
    x_records: list[list[int]] = []
    z_records: list[list[int]] = []
    for cycle in range(cycles):
        circ.cycle_starts.append(len(circ.instructions))
        circ.append("R", checks["Z"])
        for routed, pass_ in zip(routing, schedule):
            circ.append("TICK")
            if "X" in pass_.init:
                circ.append("RX", checks["X"])
            if pass_.index == len(schedule):
                z_records.append(measure("M", checks["Z"]))
            targets = [index(g.target) for g in pass_.gates]
            pairs = [q for g in pass_.gates for q in (index(g.check), index(g.data))]
            circ.append("H", targets)
            single_qubit_noise(targets)
            circ.append("CZ", pairs)
            fragments = []
            for route, gate in zip(routed.routes, pass_.gates):
                qc, qd = index(gate.check), index(gate.data)
                bd = _gate_breakdown(route.r, params, impl, detect)
                if cycle == 0:
                    entry = {"pass": pass_.index, "gate": route.gate_id, "category": str(gate.category),
                             "check": qc, "data": qd, "r": route.r, "t_dur": gate_time(route.r, params, impl, detect)}
                    entry.update(bd.as_row() if isinstance(bd, NoiseBreakdown) else {"p2q": bd})
                    manifest_gates.append(entry)
                if noiseless:
                    continue
                if isinstance(bd, NoiseBreakdown):
                    fragments.append(attach_gate_noise(qc, qd, bd, detect))
                elif bd > 0:
                    fragments.append([Instruction("DEPOLARIZE2", (qc, qd), (_prob(bd),))])
            for inst in _interleave(fragments):
                circ.append(inst.name, inst.targets, inst.args)
            circ.append("H", targets)
            single_qubit_noise(targets)
            busy = set(pairs)
            if pass_.index == len(schedule):
                busy |= set(checks["Z"])
            idle([q for q in range(2 * n) if q not in busy], pass_duration(routed, params, impl, detect))
        circ.append("TICK")
        x_records.append(measure("MX", checks["X"]))
        idle(data, params.meas_reset_time)
    data_records = measure("M" if basis == "Z" else "MX", data)
    plan = DetectorPlan(basis, cycles, x_records, z_records, data_records)
    detectors, observables = build_detectors_and_observables(code, plan)
    for det in detectors:
        circ.append("DETECTOR", det)
    for k, obs in enumerate(observables):
        circ.append("OBSERVABLE_INCLUDE", obs, (k,))
    manifest = {
        "code": code.name, "n": n, "k": code.k, "impl": impl, "detect": detect, "cycles": cycles,
        "basis": basis, "seed": seed, "params_hash": params_hash(params), "params": params.to_dict(),
        "num_detectors": len(circ.detectors), "num_observables": len(observables),
        "pass_durations": [pass_duration(p, params, impl, detect) for p in routing],
        "gates": manifest_gates,
    }
    return circ, manifest


def manifest_json(manifest: dict) -> str:
    return json.dumps(manifest, indent=1, sort_keys=True)


# --- symbolic Pauli-frame check ---------------------------------------------------

@dataclass(frozen=True)
class FrameResult:
    """Detector and observable flips as GF(2) expressions.

    Bit 0 stands for the injected errors; higher bits are free gauge choices
    introduced by resets and measurements. A quantity is deterministic iff its
    expression has no gauge bits.
    """

    detectors: tuple[int, ...]
    observables: tuple[int, ...]

    @property
    def deterministic(self) -> bool:
        return all(e >> 1 == 0 for e in self.detectors + self.observables)

    def flipped_detectors(self) -> list[int]:
        return [i for i, e in enumerate(self.detectors) if e & 1]

    def flipped_observables(self) -> list[int]:
        return [i for i, e in enumerate(self.observables) if e & 1]


def pauli_frame_check(circ: NoisyCircuit, inject: dict[int, Sequence[tuple[int, str]]] | None = None) -> FrameResult:
    """Propagate symbolic frames through the Clifford skeleton; noise channels are skipped.

    ``inject`` maps an instruction index to Pauli errors ``(qubit, "X"|"Y"|"Z")``
    applied just before that instruction.
    """
    inject = inject or {}
    xf = [0] * circ.num_qubits
    zf = [0] * circ.num_qubits
    records: list[int] = []
    fresh = 1
    detectors: list[int] = []
    observables: dict[int, int] = {}

    def new_var() -> int:
        nonlocal fresh
        fresh += 1
        return 1 << (fresh - 1)

    for pos, inst in enumerate(circ.instructions):
        for q, p in inject.get(pos, ()):
            if p in ("X", "Y"):
                xf[q] ^= 1
            if p in ("Z", "Y"):
                zf[q] ^= 1
        name, tg = inst.name, inst.targets
        if name == "H":
            for q in tg:
                xf[q], zf[q] = zf[q], xf[q]
        elif name == "CZ":
            for a, b in zip(tg[::2], tg[1::2]):
                za, zb = zf[a] ^ xf[b], zf[b] ^ xf[a]
                zf[a], zf[b] = za, zb
        elif name == "R":
            for q in tg:
                xf[q], zf[q] = 0, new_var()
        elif name == "RX":
            for q in tg:
                xf[q], zf[q] = new_var(), 0
        elif name == "M":
            for q in tg:
                records.append(xf[q])
                zf[q] = new_var()
        elif name == "MX":
            for q in tg:
                records.append(zf[q])
                xf[q] = new_var()
        elif name == "HERALDED_ERASE":
            records.extend(0 for _ in tg)
        elif name == "DETECTOR":
            e = 0
            for rec in tg:
                e ^= records[rec]
            detectors.append(e)
        elif name == "OBSERVABLE_INCLUDE":
            k = int(inst.args[0])
            for rec in tg:
                observables[k] = observables.get(k, 0) ^ records[rec]
        elif name in ("TICK", "QUBIT_COORDS") or name.endswith("ERROR") or name.startswith("DEPOLARIZE"):
            continue
        else:
            raise CircuitError(f"frame check does not support {name}")
    return FrameResult(tuple(detectors), tuple(observables[k] for k in sorted(observables)))
