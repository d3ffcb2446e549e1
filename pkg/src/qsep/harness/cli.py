"""Command-line entry point: ``qsep <verb> [flags]``.

Exit codes: 0 all verdicts pass, 1 some verdict failed, 2 usage error,
3 resource limit hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..classical import ClassicalCircuit, build_mod_pk, build_relation_decider, hex_to_bits
from ..constructions import (
    RelationParams, bpm_to_ghz_circuit, mbqc_fanout_circuit, qexact_circuit, qor_full, qthreshold_circuit,
    relation_circuit,
)
from ..errors import DomainError, ResourceError, UsageError
from . import experiments as ex

GLOBAL_DEFAULTS = {"seed": ex.DEFAULT_SEED, "shots": ex.DEFAULT_SHOTS, "mode": "exact", "max_amplitudes": None}

# verb -> (config class, {flag: (type, default)})
VERBS = {
    "relation": (ex.RelationConfig, {"p": (int, None), "q": (int, None), "n": (int, None)}),
    "parallel": (ex.ParallelConfig, {"p": (int, None), "q": (int, None), "n": (int, None), "k": (int, 8),
                                     "trials": (int, 1000), "amplify": (int, 4)}),
    "ghz": (ex.GhzConfig, {"q": (int, None), "n": (int, None), "seeds": (int, 100)}),
    "qor": (ex.TruthTableConfig, {"p": (int, None), "n": (int, None)}),
    "qexact": (ex.TruthTableConfig, {"p": (int, None), "n": (int, None), "k": (int, None)}),
    "qth": (ex.TruthTableConfig, {"p": (int, None), "n": (int, None), "t": (int, None)}),
    "fanout-mbqc": (ex.FanoutConfig, {"p": (int, None), "n": (int, None), "states": (int, 50)}),
    "classical-modpk": (ex.ModPkConfig, {"p": (int, None), "k": (int, None), "n": (int, None),
                                         "samples": (int, 10_000)}),
    "classical-decider": (ex.DeciderConfig, {"p": (int, None), "q": (int, None), "n": (int, None), "R": (int, 16),
                                             "trials": (int, 1000), "solver": (str, "quantum")}),
    "xor-bias": (ex.XorConfig, {"count": (int, 1000), "kmax": (int, 8)}),
}

RUNNERS = {
    "relation": ex.exp_relation, "parallel": ex.exp_parallel, "ghz": ex.exp_ghz,
    "qor": ex.exp_truth_table, "qexact": ex.exp_truth_table, "qth": ex.exp_truth_table,
    "fanout-mbqc": ex.exp_fanout, "classical-modpk": ex.exp_modpk, "classical-decider": ex.exp_decider,
    "xor-bias": ex.exp_xor,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_globals(p: argparse.ArgumentParser):
    g = p.add_argument_group("global")
    g.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="master seed (default 0xC0FFEE)")
    g.add_argument("--shots", type=int, default=None, help="Monte-Carlo shots (default 10000)")
    g.add_argument("--mode", choices=ex.MODES, default=None)
    g.add_argument("--out", type=Path, default=None, help="write the JSON report here")
    g.add_argument("--csv", type=Path, default=None, help="write the CSV mirror here")
    g.add_argument("--dump-circuit", type=Path, default=None, help="write the circuit JSON here")
    g.add_argument("--max-amplitudes", type=int, default=None)
    g.add_argument("--config", type=Path, default=None, help="JSON file of flag values; flags win")
    g.add_argument("--quiet", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qsep", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)
    for verb, (_, flags) in VERBS.items():
        sp = sub.add_parser(verb)
        for name, (typ, _) in flags.items():
            sp.add_argument(f"--{name}", type=typ, default=None)
        if verb == "classical-modpk":
            sp.add_argument("--exhaustive", action="store_true", default=None)
        _add_globals(sp)
    sp = sub.add_parser("classical-eval", help="evaluate a classical circuit JSON on hex inputs")
    sp.add_argument("circuit", type=Path)
    sp.add_argument("inputs", nargs="+", help="hex-encoded inputs; bit i of the number is input i")
    _add_globals(sp)
    return parser


def _resolve(args) -> dict:
    """Merge flag values over the config file over defaults."""
    cfg_file = {}
    if args.config is not None:
        try:
            cfg_file = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from None
    _, flags = VERBS[args.verb]
    out = {}
    names = list(flags) + list(GLOBAL_DEFAULTS) + (["exhaustive"] if args.verb == "classical-modpk" else [])
    for name in names:
        given = getattr(args, name, None)
        if given is not None:
            out[name] = given
        elif name in cfg_file:
            out[name] = cfg_file[name]
        else:
            out[name] = flags[name][1] if name in flags else GLOBAL_DEFAULTS.get(name, False)
    missing = [n for n, v in out.items() if v is None and n in flags and flags[n][1] is None]
    if missing:
        raise UsageError(f"{args.verb}: missing --{', --'.join(missing)}")
    return out


def _config(verb: str, values: dict):
    cls, _ = VERBS[verb]
    values = dict(values)
    if verb in ("qor", "qexact", "qth"):
        values["kind"] = verb
        values["k"] = values.pop("t", values.get("k"))
    if values.get("seed") is not None and values["seed"] < 0:
        raise UsageError("seed must be non-negative")
    try:
        return cls(**values)
    except TypeError as e:
        raise UsageError(str(e)) from None


def _circuit_for(verb: str, cfg):
    if verb in ("relation", "parallel"):
        return relation_circuit(RelationParams(cfg.p, cfg.q, cfg.n))
    if verb == "ghz":
        return bpm_to_ghz_circuit(cfg.q, cfg.n)
    if verb == "qor":
        return qor_full(cfg.p, cfg.n)
    if verb == "qexact":
        return qexact_circuit(cfg.p, cfg.n, cfg.k)
    if verb == "qth":
        return qthreshold_circuit(cfg.p, cfg.n, cfg.k)
    if verb == "fanout-mbqc":
        return mbqc_fanout_circuit(cfg.p, cfg.n)
    if verb == "classical-modpk":
        return build_mod_pk(cfg.p, cfg.k, cfg.n)
    if verb == "classical-decider":
        return build_relation_decider(cfg.p, cfg.q, cfg.n, cfg.R, lambda x, rng: ()).circuit
    return None


def _classical_eval(args) -> int:
    try:
        circuit = ClassicalCircuit.loads(args.circuit.read_text())
    except OSError as e:
        raise UsageError(f"cannot read {args.circuit}: {e}") from None
    for text in args.inputs:
        out = circuit.evaluate(hex_to_bits(text, circuit.n_inputs))
        print(f"{text} -> {''.join(str(int(b)) for b in out)}")
    return 0


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verb == "classical-eval":
        return _classical_eval(args)
    values = _resolve(args)
    try:
        cfg = _config(args.verb, values)
        if args.dump_circuit is not None:
            c = _circuit_for(args.verb, cfg)
            if c is not None:
                args.dump_circuit.write_text(c.dumps(indent=1))
        report = RUNNERS[args.verb](cfg)
    except DomainError as e:
        raise UsageError(str(e)) from None
    if args.out is not None:
        args.out.write_text(report.dumps())
    if args.csv is not None:
        args.csv.write_text(report.to_csv())
    if not args.quiet:
        for line in report.lines():
            print(line)
        print(f"{'PASS' if report.passed else 'FAIL'}  {args.verb} ({report.runtime_ms:.0f} ms)")
    return 0 if report.passed else 1


def main(argv=None) -> int:
    try:
        return run(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 2
    except ResourceError as e:
        print(f"resource error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
