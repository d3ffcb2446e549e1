import math

import numpy as np
import pytest
from hypothesis import given, strategies as hs

import oracles as orc
from qsep import gates as g
from qsep import state as st
from qsep.circuit import (
    AffineRule, Circuit, Correction, Measure, PrepareAncilla, TableRule, Unitary, WireAllocator, invert,
    output_distribution, parallel, replay, run_exact, run_sampled, sample_records, seq,
)
from qsep.constructions import (
    RelationParams, bpm_to_ghz_circuit, mbqc_fanout_circuit, qor_exponential_circuit, relation_circuit,
)
from qsep.errors import CircuitValidationError, DomainError, ResourceError, UsageError


def test_layer_hint_packs_disjoint_gates():
    c = Circuit(3, 4, inputs=(0, 1, 2, 3))
    c.append(Unitary(g.Sum(), (0, 1)))
    c.append(Unitary(g.Sum(), (2, 3)), layer=0)
    assert c.depth == 1 and c.size == 2
    c.validate()


def test_validation_names_the_wire():
    c = Circuit(2, 2, inputs=(0, 1))
    c.append(Measure((1,), (0,)))
    c.append(Unitary(g.XShift(), (1,)))
    with pytest.raises(CircuitValidationError) as e:
        c.validate()
    assert any(d.wires == (1,) and d.layer == 1 for d in e.value.diagnostics)
    assert "wire 1" in str(e.value)


def test_validation_reports_every_violation():
    c = Circuit(3, 2, inputs=(0, 1))
    c.append(Unitary(g.XShift(), (0,)))
    c.append(Unitary(g.Sum(), (0, 1)), layer=0)
    c.append(Correction(1, g.XShift(), AffineRule.of({5: 1})))
    c.append(Correction(0, g.Fourier(), AffineRule.of({}, 1)))
    c.append(Unitary(g.XShift(), (7,)))
    msgs = [d.message for d in c.diagnostics()]
    assert len(msgs) == 4
    assert any("two instructions" in m for m in msgs)
    assert any("unfilled" in m for m in msgs)
    assert any("record-driven" in m for m in msgs)
    assert any("out of range" in m for m in msgs)


def test_layer_hint_out_of_range():
    with pytest.raises(DomainError):
        Circuit(2, 1).append(Unitary(g.XShift(), (0,)), layer=3)


def test_relation_circuit_depth_is_independent_of_n():
    depths = {relation_circuit(RelationParams(2, 3, n)).validate().depth for n in (2, 4, 8, 16)}
    assert len(depths) == 1


def test_metrics():
    assert Circuit(2, 0).metrics() == {"depth": 0, "size": 0, "ancillas": 0}
    c = bpm_to_ghz_circuit(3, 7)
    assert c.metrics()["depth"] == 7
    assert qor_exponential_circuit(2, 3).size <= 3 * 24


def test_no_measurement_run_is_the_unitary_action():
    c = Circuit(3, 2, inputs=(0, 1))
    c.append(Unitary(g.Fourier(), (0,)))
    c.append(Unitary(g.Sum(), (0, 1)))
    run = run_sampled(c, [0, 0], seed=1)
    assert run.record == {}
    assert np.allclose(run.state.to_dense(), orc.ghz(0, 3, 2))
    branches = run_exact(c, [0, 0])
    assert len(branches) == 1 and branches[0].probability == pytest.approx(1)


def test_corrections_read_the_record():
    c = Circuit(3, 2, inputs=(0,))
    c.append(Unitary(g.Fourier(), (0,)))
    c.append(Measure((0,), (0,)))
    c.append(Correction(1, g.XShift(), AffineRule.of({0: 2}, 1)))
    for b in run_exact(c, [0]):
        assert b.state.basis_value(1) == (1 + 2 * b.record[0]) % 3
    t = TableRule.of([0], {(1,): 2}, default=0)
    assert t({0: 1}, 3) == 2 and t({0: 0}, 3) == 0


def test_rules_round_trip_through_json():
    c = Circuit(3, 2, inputs=(0,))
    c.append(PrepareAncilla((1,), "basis", 2))
    c.append(Unitary(g.CGradedPhase(g.Phase.of(1, 9)), (0, 1)))
    c.append(Measure((0,), (0,)))
    c.append(Correction(1, g.XShift(), TableRule.of([0], {(1,): 2})))
    c.append(Correction(1, g.GradedPhase(g.Phase.of(1, 3)), AffineRule.of({0: 1})), layer=3)
    back = Circuit.loads(c.dumps())
    assert back == c
    assert c.to_json()["format"] == "qsep-circuit/1"
    with pytest.raises(DomainError):
        Circuit.from_json({"format": "other"})


@pytest.mark.parametrize("build", [
    lambda: relation_circuit(RelationParams(3, 2, 3)),
    lambda: bpm_to_ghz_circuit(3, 4),
    lambda: mbqc_fanout_circuit(3, 3),
    lambda: qor_exponential_circuit(3, 2),
])
def test_json_round_trip_of_constructions(build):
    c = build()
    assert Circuit.loads(c.dumps()).to_json() == c.to_json()


def test_sampling_is_deterministic_per_seed():
    c = bpm_to_ghz_circuit(3, 5)
    assert run_sampled(c, seed=5).record == run_sampled(c, seed=5).record


def _assert_within_3_sigma(samples, exact, shots):
    counts = {}
    for key in samples:
        counts[key] = counts.get(key, 0) + 1
    assert set(counts) <= set(exact)
    for key, p in exact.items():
        sigma = math.sqrt(p * (1 - p) / shots)
        assert abs(counts.get(key, 0) / shots - p) <= 3 * sigma + 1 / shots, key


SAMPLED_CASES = [
    ("relation p3 q2 n3 x=100", lambda: relation_circuit(RelationParams(3, 2, 3)), [1, 0, 0]),
    ("relation p2 q3 n4 x=1000", lambda: relation_circuit(RelationParams(2, 3, 4)), [1, 0, 0, 0]),
    ("bpm_to_ghz q3 n4", lambda: bpm_to_ghz_circuit(3, 4), None),
    ("bpm_to_ghz q2 n4", lambda: bpm_to_ghz_circuit(2, 4), None),
    ("mbqc fanout p3 n3", lambda: mbqc_fanout_circuit(3, 3), "random"),
]


@pytest.mark.parametrize("name,build,inp", SAMPLED_CASES, ids=[c[0] for c in SAMPLED_CASES])
def test_sampling_matches_exact_marginals(name, build, inp):
    c = build()
    if inp == "random":
        rng = np.random.default_rng(3)
        v = rng.normal(size=27) + 1j * rng.normal(size=27)
        inp = st.StateVector.from_amplitudes(3, v, normalize=True)
    slots = sorted({s for ins in c.instructions() if isinstance(ins, Measure) for s in ins.slots})
    exact = output_distribution(run_exact(c, inp), slots)
    shots = 10_000
    runs = sample_records(c, inp, shots, seed=0xC0FFEE)
    _assert_within_3_sigma([tuple(r.record[s] for s in slots) for r in runs], exact, shots)


def test_relation_sampling_example():
    c = relation_circuit(RelationParams(3, 2, 3))
    runs = sample_records(c, [1, 0, 0], 10_000, seed=0)
    odd = sum(sum(r.record[s] for s in range(3)) % 2 for r in runs) / 10_000
    assert abs(odd - 0.75) <= 0.02


@given(hs.integers(0, 2**32 - 1))
def test_replay_is_bit_exact(seed):
    for c, inp in [(bpm_to_ghz_circuit(3, 5), None), (mbqc_fanout_circuit(3, 3), [1, 2, 0])]:
        run = run_sampled(c, inp, seed=seed)
        again = replay(c, inp, run.record)
        assert np.array_equal(again.restrict(c.outputs).to_dense(), run.state.restrict(c.outputs).to_dense())


@pytest.mark.parametrize("build,inp", [
    (lambda: bpm_to_ghz_circuit(2, 5), None),
    (lambda: bpm_to_ghz_circuit(5, 4), None),
    (lambda: relation_circuit(RelationParams(5, 3, 4)), [1, 1, 0, 0]),
    (lambda: mbqc_fanout_circuit(5, 3), [4, 1, 2]),
])
def test_branch_probabilities_sum_to_one(build, inp):
    total = sum(b.probability for b in run_exact(build(), inp))
    assert abs(total - 1) <= 1e-9


def test_branch_cap():
    with pytest.raises(ResourceError) as e:
        run_exact(bpm_to_ghz_circuit(3, 6), branch_cap=10)
    assert e.value.limit == 10


def test_input_shape_checked():
    with pytest.raises(DomainError):
        run_sampled(relation_circuit(RelationParams(3, 2, 3)), [0, 0], seed=0)


def test_layer_algebra():
    a = [[Unitary(g.XShift(), (0,))], [Unitary(g.Fourier(), (0,))]]
    b = [[Unitary(g.Negate(), (1,))]]
    assert [len(layer) for layer in parallel(a, b)] == [2, 1]
    assert len(seq(a, [], b)) == 3
    inv = invert(a)
    assert inv[0][0].gate == g.FourierInv() and inv[1][0].gate == g.XShift(-1)
    with pytest.raises(UsageError):
        invert([[Measure((0,), (0,))]])
    alloc = WireAllocator(3)
    assert alloc.take(2) == [3, 4] and alloc.one() == 5 and alloc.next == 6
