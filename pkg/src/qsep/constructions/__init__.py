"""Circuit builders for the quantum constructions."""

from .ghz import (
    BalancedTree, bpm_circuit, bpm_to_ghz_circuit, correction_rules, edge_wire, tree_correction, vertex_wire,
)
from .mbqc import mbqc_fanout_circuit
from .qor import (
    FourierTable, IntegerDecomposition, fourier_table, or_reduction_circuit, orbar, orbar_coefficients,
    qexact_circuit, qor_exponential_circuit, qor_full, qthreshold_circuit,
)
from .relation import (
    RelationParams, check_bits, expand_c_q2, relation_circuit, relation_outputs, relation_success,
    sample_answers, weight_class_representative,
)
