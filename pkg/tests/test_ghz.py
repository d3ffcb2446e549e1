import itertools

import numpy as np
import pytest

import oracles as orc
from qsep import state as st
from qsep.circuit import Unitary, run_exact, run_sampled
from qsep.constructions import (
    BalancedTree, bpm_circuit, bpm_to_ghz_circuit, correction_rules, tree_correction, vertex_wire,
)
from qsep.errors import DomainError


def test_tree_structure():
    t = BalancedTree(7)
    assert t.edges == [(i, i // 2) for i in range(2, 8)]
    assert [t.depth(i) for i in range(1, 8)] == [0, 1, 1, 2, 2, 2, 2]
    assert t.root_path(5) == [5, 2, 1]
    assert len(t.edge_layers) == 3


@pytest.mark.parametrize("n", range(2, 40))
def test_edge_schedule_is_a_proper_colouring(n):
    t = BalancedTree(n)
    covered = []
    for rnd in t.edge_layers:
        vertex_side = [v for v, _ in rnd]
        assert len(set(vertex_side)) == len(vertex_side)
        assert len(set(e for _, e in rnd)) == len(rnd)
        covered += rnd
    # every edge gets both of its endpoints summed in
    assert sorted(covered) == sorted([(i, i) for i in range(2, n + 1)] + [(i // 2, i) for i in range(2, n + 1)])


def test_bpm_depth_and_sum_layers():
    c = bpm_circuit(3, 7)
    assert c.depth <= 4
    sum_layers = [layer for layer in c.layers if all(isinstance(i, Unitary) and i.gate.name == "Sum" for i in layer)]
    assert len(sum_layers) == 3
    assert bpm_circuit(3, 2).depth == 3
    with pytest.raises(DomainError):
        bpm_circuit(3, 1)
    with pytest.raises(DomainError):
        bpm_circuit(4, 3)


def test_bpm_n2_example():
    v = run_exact(bpm_circuit(2, 2))[0].state.to_dense()
    want = np.zeros(8)
    for e, x in itertools.product((0, 1), repeat=2):
        want[orc.index([e, x, e ^ x], 2)] = 0.5
    assert np.allclose(v, want)


@pytest.mark.parametrize("q,n", [(2, 2), (2, 3), (2, 4), (2, 5), (3, 3), (3, 4), (5, 3)])
def test_bpm_state_matches_definition(q, n):
    v = run_exact(bpm_circuit(q, n))[0].state.to_dense()
    want = orc.bpm_dense(q, n)
    assert np.allclose(v, want, atol=1e-12)
    if (q, n) == (2, 4):
        assert set(np.round(np.abs(v[np.abs(v) > 1e-12]), 12)) == {0.25}


def test_tree_correction_example():
    shifts, flags = tree_correction(3, [1, 2], 3)
    assert flags == [False, True, True]
    assert shifts == [0, (-1) % 3, (-2) % 3]
    # post-measurement vertices: (v, 1 - v, 2 - v); shift then negate gives (v, v, v)
    for v in range(3):
        verts = [v, (1 - v) % 3, (2 - v) % 3]
        fixed = [((x + s) % 3) * (-1 if f else 1) % 3 for x, s, f in zip(verts, shifts, flags)]
        assert fixed == [v, v, v]


def test_zero_record():
    shifts, flags = tree_correction(7, [0] * 6, 5)
    assert shifts == [0] * 7
    assert flags == [BalancedTree.depth(i) % 2 == 1 for i in range(1, 8)]


def test_corrections_depend_only_on_root_path():
    rules = correction_rules(7, 3)
    assert set(rules[5].slots) == {5 - 2, 2 - 2}
    for i in range(2, 8):
        path_edges = {j - 2 for j in BalancedTree(7).root_path(i) if j > 1}
        assert set(rules[i].slots) <= path_edges
        assert len(rules[i].slots) <= int(np.log2(7)) + 1
    with pytest.raises(DomainError):
        tree_correction(3, [1], 3)


@pytest.mark.parametrize("q,n", [(2, 2), (2, 4), (2, 5), (3, 3), (3, 4), (5, 3), (5, 4)])
def test_bpm_to_ghz_every_branch(q, n):
    c = bpm_to_ghz_circuit(q, n)
    target = st.ghz(0, q, n)
    dense_target = orc.ghz(0, q, n)
    branches = run_exact(c)
    assert len(branches) == q ** (n - 1)
    assert abs(sum(b.probability for b in branches) - 1) <= 1e-9
    for b in branches:
        out = b.outputs(c)
        assert abs(st.fidelity(out, target) - 1) <= 1e-9
        assert abs(abs(np.vdot(dense_target, out.to_dense())) ** 2 - 1) <= 1e-9


def test_bpm_to_ghz_sampled_seeds():
    c = bpm_to_ghz_circuit(2, 4)
    for seed in range(100):
        run = run_sampled(c, seed=seed)
        assert abs(st.fidelity(run.state.restrict(c.outputs), st.ghz(0, 2, 4)) - 1) <= 1e-9


def test_bpm_to_ghz_layout():
    c = bpm_to_ghz_circuit(3, 7)
    assert c.depth == 7
    assert c.outputs == tuple(vertex_wire(7, i) for i in range(1, 8))
    assert c.metadata["correction_slots"][5] == [0, 3]
