from __future__ import annotations

import json

import numpy as np
import pytest

from bbroute.circuit import (
    CircuitError,
    Instruction,
    NoisyCircuit,
    _interleave,
    attach_gate_noise,
    emit_memory_experiment,
    emitted_probability,
    manifest_json,
    pauli_frame_check,
)
from bbroute.noise import erasure_rates, p2q, p2q_sws

import oracles

NOISE = ("X_ERROR", "Z_ERROR", "DEPOLARIZE1", "DEPOLARIZE2", "HERALDED_ERASE")


@pytest.fixture(scope="module")
def setup(codes, layouts, toric_routes):
    name = "18-4-4"
    return codes[name], layouts[name], toric_routes[name]


def test_append_validation():
    circ = NoisyCircuit(2)
    with pytest.raises(CircuitError):
        circ.append("H", [2])
    with pytest.raises(CircuitError):
        circ.append("DETECTOR", [0])
    circ.measure("M", [0, 1])
    circ.append("DETECTOR", [1])
    circ.append("X_ERROR", [], (0.1,))
    assert circ.count("X_ERROR") == 0
    assert circ.detectors == [(1,)]


def test_stim_text_uses_relative_records():
    circ = NoisyCircuit(2)
    circ.metadata = {"code": "toy"}
    circ.append("R", [0, 1])
    circ.measure("M", [0, 1])
    circ.append("DETECTOR", [0])
    circ.append("OBSERVABLE_INCLUDE", [1], (0,))
    text = circ.to_stim()
    assert text.startswith("# code: toy\n")
    assert "DETECTOR rec[-2]" in text
    assert "OBSERVABLE_INCLUDE(0) rec[-1]" in text


@pytest.mark.parametrize("detect", [True, False])
@pytest.mark.parametrize("r", [0, 4, 25])
def test_gate_noise_sums_to_breakdown(detect, r):
    bd = p2q_sws(r, detect=detect)
    frag = attach_gate_noise(20, 3, bd, detect)
    assert emitted_probability(frag) == pytest.approx(bd.total, rel=1e-12)
    names = {i.name for i in frag}
    assert ("HERALDED_ERASE" in names) == detect
    assert ("DEPOLARIZE2" in names) == (not detect)
    if detect:
        erase = {i.targets[0]: i.args[0] for i in frag if i.name == "HERALDED_ERASE"}
        assert abs(erase[20] - erasure_rates(r)[0]) <= 1e-12
        assert abs(erase[3] - erasure_rates(r)[1]) <= 1e-12


def test_interleave_fuses_identical_channels():
    frags = [[Instruction("X_ERROR", (0,), (0.1,))], [Instruction("X_ERROR", (1,), (0.1,))], [Instruction("X_ERROR", (2,), (0.2,))]]
    out = _interleave(frags)
    assert [(i.targets, i.args) for i in out] == [((0, 1), (0.1,)), ((2,), (0.2,))]


@pytest.mark.parametrize("basis", ["Z", "X"])
@pytest.mark.parametrize("detect", [True, False])
@pytest.mark.parametrize("cycles", [1, 3])
def test_structure_and_determinism(setup, basis, detect, cycles):
    code, layout, routed = setup
    circ, manifest = emit_memory_experiment(code, layout, routed, detect=detect, cycles=cycles, basis=basis)
    assert len(circ.detectors) == code.n * cycles
    assert len(circ.observables) == code.k
    assert manifest["num_detectors"] == code.n * cycles
    assert len(manifest["gates"]) == 6 * code.n
    frame = pauli_frame_check(circ)
    assert frame.deterministic
    assert not frame.flipped_detectors() and not frame.flipped_observables()
    assert circ.count("HERALDED_ERASE") > 0 if detect else circ.count("HERALDED_ERASE") == 0


def test_noiseless_has_no_channels(setup):
    code, layout, routed = setup
    circ, _ = emit_memory_experiment(code, layout, routed, cycles=2, noiseless=True)
    assert all(circ.count(name) == 0 for name in NOISE)


@pytest.mark.parametrize("cycle", [1, 2, 3])
def test_data_x_flips_neighboring_z_checks(setup, cycle):
    code, layout, routed = setup
    circ, _ = emit_memory_experiment(code, layout, routed, cycles=4, noiseless=True)
    hz = code.hz.to_dense()
    for q in range(code.n):
        res = pauli_frame_check(circ, {circ.cycle_starts[cycle]: [(q, "X")]})
        assert res.flipped_detectors() == oracles.z_detectors_for_data_x(hz, q, cycle, code.half)


def test_data_z_flips_x_checks_in_x_basis(setup):
    code, layout, routed = setup
    circ, _ = emit_memory_experiment(code, layout, routed, cycles=3, basis="X", noiseless=True)
    hx = code.hx.to_dense()
    q, cycle = 5, 1
    res = pauli_frame_check(circ, {circ.cycle_starts[cycle]: [(q, "Z")]})
    base = code.half + code.half  # first round, then this cycle's Z differences
    assert res.flipped_detectors() == [base + int(i) for i in np.flatnonzero(hx[:, q])]


def test_byte_identical_reemission(setup):
    code, layout, routed = setup
    a, ma = emit_memory_experiment(code, layout, routed, cycles=3, seed=11)
    b, mb = emit_memory_experiment(code, layout, routed, cycles=3, seed=11)
    c, _ = emit_memory_experiment(code, layout, routed, cycles=3, seed=12)
    assert a.to_stim() == b.to_stim()
    assert manifest_json(ma) == manifest_json(mb)
    body = lambda text: text.split("\n", 8)[-1]  # noqa: E731
    assert a.to_stim() != c.to_stim() and body(a.to_stim()) == body(c.to_stim())


def test_manifest_records_per_gate_values(setup):
    code, layout, routed = setup
    _, manifest = emit_memory_experiment(code, layout, routed, cycles=1)
    rs = {(p.pass_index, rt.gate_id): rt.r for p in routed for rt in p.routes}
    for gate in manifest["gates"]:
        assert gate["r"] == rs[(gate["pass"], gate["gate"])]
        assert gate["p_eras_ctrl"] == pytest.approx(erasure_rates(gate["r"])[0], abs=1e-12)
    json.loads(manifest_json(manifest))


@pytest.mark.parametrize("impl", ["iswap-cz", "cvdv"])
def test_other_implementations_use_two_qubit_depolarizing(setup, impl):
    code, layout, routed = setup
    circ, _ = emit_memory_experiment(code, layout, routed, impl=impl, cycles=1)
    assert circ.count("HERALDED_ERASE") == 0
    probs = {i.args[0] for i in circ.instructions if i.name == "DEPOLARIZE2"}
    assert probs <= {p2q(r, impl=impl) for r in {rt.r for p in routed for rt in p.routes}}


def test_emit_validation(setup, toric_routes):
    code, layout, routed = setup
    with pytest.raises(CircuitError):
        emit_memory_experiment(code, layout, routed, basis="Y")
    with pytest.raises(CircuitError):
        emit_memory_experiment(code, layout, routed, cycles=0)
    with pytest.raises(CircuitError):
        emit_memory_experiment(code, layout, routed[:3])
    with pytest.raises(CircuitError):
        emit_memory_experiment(code, layout, toric_routes["72-12-6"])


def test_stim_cross_check(setup):
    stim = pytest.importorskip("stim")
    code, layout, routed = setup
    for detect in (True, False):
        circ, _ = emit_memory_experiment(code, layout, routed, detect=detect, cycles=3)
        parsed = stim.Circuit(circ.to_stim())
        assert parsed.num_detectors == len(circ.detectors)
        assert parsed.num_observables == code.k
        dem = parsed.detector_error_model(approximate_disjoint_errors=True)
        assert dem.num_detectors == len(circ.detectors)
    clean, _ = emit_memory_experiment(code, layout, routed, cycles=3, noiseless=True)
    samples = stim.Circuit(clean.to_stim()).compile_detector_sampler(seed=1).sample(64, append_observables=True)
    assert not samples.any()
