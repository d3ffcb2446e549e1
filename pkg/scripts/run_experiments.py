"""Run the standard experiment suite and write one JSON/CSV report per run.

    python3 scripts/run_experiments.py --out reports/ [--seed 0xC0FFEE] [--only relation ghz]
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from qsep.errors import ResourceError
from qsep.harness import experiments as ex

SUITE = [
    ("relation-3-2", ex.exp_relation, ex.RelationConfig(p=3, q=2, n=6)),
    ("relation-2-3", ex.exp_relation, ex.RelationConfig(p=2, q=3, n=6)),
    ("relation-3-5", ex.exp_relation, ex.RelationConfig(p=3, q=5, n=4)),
    ("parallel-3-2", ex.exp_parallel, ex.ParallelConfig(p=3, q=2, n=6)),
    ("ghz-3-7", ex.exp_ghz, ex.GhzConfig(q=3, n=7)),
    ("qor-3-4", ex.exp_truth_table, ex.TruthTableConfig(p=3, n=4, kind="qor")),
    ("qexact-2-4", ex.exp_truth_table, ex.TruthTableConfig(p=2, n=4, kind="qexact", k=2)),
    ("qth-2-4", ex.exp_truth_table, ex.TruthTableConfig(p=2, n=4, kind="qth", k=3)),
    ("fanout-3-3", ex.exp_fanout, ex.FanoutConfig(p=3, n=3)),
    ("modpk-2-3", ex.exp_modpk, ex.ModPkConfig(p=2, k=3, n=12, exhaustive=True)),
    ("decider-3-2", ex.exp_decider, ex.DeciderConfig(p=3, q=2, n=6)),
    ("xor-bias", ex.exp_xor, ex.XorConfig()),
]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("reports"))
    ap.add_argument("--seed", type=lambda s: int(s, 0), default=ex.DEFAULT_SEED)
    ap.add_argument("--only", nargs="*", help="run only these names (prefix match)")
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    failed = 0
    for name, runner, cfg in SUITE:
        if args.only and not any(name.startswith(o) for o in args.only):
            continue
        cfg.seed = args.seed
        try:
            report = runner(cfg)
        except ResourceError as e:
            print(f"SKIP  {name}: {e}")
            continue
        (args.out / f"{name}.json").write_text(report.dumps())
        (args.out / f"{name}.csv").write_text(report.to_csv())
        failed += not report.passed
        print(f"{'PASS' if report.passed else 'FAIL'}  {name} ({report.runtime_ms:.0f} ms)")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
