"""Relation checkers, experiment drivers and the report/CLI surface."""

from .experiments import (
    DeciderConfig, FanoutConfig, GhzConfig, ModPkConfig, ParallelConfig, RelationConfig, RunConfig,
    TruthTableConfig, XorConfig, exp_decider, exp_fanout, exp_ghz, exp_modpk, exp_parallel, exp_relation,
    exp_truth_table, exp_xor,
)
from .relation import QuantumSolver, check_relation, perfect_solver, random_solver, zero_solver
from .report import Report, Row, verdict_of
