"""Command-line driver: sessions, attack experiments, leakage, tables, efficiency."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from qdcavity import __version__
from qdcavity.analysis import (
    COMPARISON_TABLE,
    PRESENT_PROTOCOL,
    efficiency,
    efficiency_exact,
    leakage_report,
    percent,
    reports_to_csv,
    run_experiment,
)
from qdcavity.cavity import COLLECTION_SETS, TABLE1, TABLE_ORDER, Collection, regenerate_table
from qdcavity.config import DEFAULT_SEED, ConfigError, SessionSpec, load_config
from qdcavity.protocol import MessageBits, run_session

SCHEMA_VERSION = 1

EXIT_OK, EXIT_USAGE, EXIT_ABORT = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _spec_dict(spec: SessionSpec) -> dict:
    cfg = spec.config
    return {
        "n_message_pairs": cfg.n_message_pairs,
        "initial_states": None if cfg.initial_states is None else [s.value for s in cfg.initial_states],
        "randomize_initials": cfg.randomize_initials,
        "first_check_samples": cfg.first_check_samples,
        "second_check_samples": cfg.second_check_samples,
        "first_check_basis": cfg.first_check_basis,
        "decoy_basis": cfg.decoy_basis,
        "error_threshold": cfg.error_threshold,
        "seed": spec.seed,
        "attack": {"kind": spec.attack.kind.value, "theta": spec.attack.theta, "channel": spec.attack.channel},
    }


def cmd_run(args) -> int:
    spec = load_config(args.config, args.seed)
    import numpy as np

    rng = np.random.default_rng(spec.seed)
    bits = spec.bits or MessageBits.random(spec.config.n_message_pairs, rng)
    result = run_session(spec.config, bits, spec.attack, rng)
    sent_a = [o.value for o in bits.alice_bits]
    sent_b = [o.value for o in bits.bob_bits]
    if args.format == "csv":
        rows = []
        for n in range(spec.config.n_message_pairs):
            rows.append({
                "group": n,
                "alice_sent": sent_a[n],
                "bob_sent": sent_b[n],
                "collection": result.collections[n] if not result.aborted else "",
                "bob_decoded": result.bob_decoded[n] if not result.aborted else "",
                "alice_decoded": result.alice_decoded[n] if not result.aborted else "",
                "aborted": result.abort_stage,
            })
        text = _csv(rows, ["group", "alice_sent", "bob_sent", "collection", "bob_decoded", "alice_decoded", "aborted"])
    else:
        text = _dump_json({
            "schema_version": SCHEMA_VERSION,
            "command": "run",
            "config": _spec_dict(spec),
            "sent": {"alice": sent_a, "bob": sent_b},
            "result": result.to_dict(),
        })
    _emit(text, args.out)
    return EXIT_ABORT if result.aborted else EXIT_OK


def cmd_attack(args) -> int:
    spec = load_config(args.config, args.seed)
    if not spec.attack.active:
        raise ConfigError("attack.kind", "the attack command needs an active attack")
    report = run_experiment(spec.config, spec.attack, args.trials, args.jobs, spec.seed, spec.bits)
    if args.format == "csv":
        text = reports_to_csv([report])
    else:
        text = _dump_json({"schema_version": SCHEMA_VERSION, "command": "attack",
                           "config": _spec_dict(spec), "report": report.to_dict()})
    _emit(text, args.out)
    print(
        f"{report.attack}: measured {report.detection_frequency:.4f} +/- {report.stderr:.4f} "
        f"over {report.checked} checked atoms, analytic {report.analytic_reference:.4f}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_leakage(args) -> int:
    secret = leakage_report(public_initial=False)
    public = leakage_report(public_initial=True)
    if args.format == "csv":
        rows = [
            {"initial": s.initial.value, "alice_op": s.alice_op.value, "bob_op": s.bob_op.value,
             "collection": s.collection, "entropy_secret_initial": s.entropy_bits,
             "joint_entropy_secret_initial": s.joint_entropy_bits,
             "entropy_public_initial": p.entropy_bits}
            for s, p in zip(secret.cases, public.cases)
        ]
        text = _csv(rows, list(rows[0]))
    else:
        text = _dump_json({"schema_version": SCHEMA_VERSION, "command": "leakage",
                           "secret_initial": secret.to_dict(), "public_initial": public.to_dict()})
    _emit(text, args.out)
    return EXIT_OK


def cmd_tables(args) -> int:
    regenerated = regenerate_table()
    match = regenerated == TABLE1
    entries = [
        {"row": r.value, "column": c.value, "collection": TABLE1[(r, c)].value,
         "regenerated": regenerated[(r, c)].value}
        for r in TABLE_ORDER for c in TABLE_ORDER
    ]
    if args.format == "csv":
        text = _csv(entries, ["row", "column", "collection", "regenerated"])
    else:
        text = _dump_json({
            "schema_version": SCHEMA_VERSION,
            "command": "tables",
            "collections": {c.value: sorted(COLLECTION_SETS[c]) for c in Collection},
            "table": entries,
            "match": match,
        })
    _emit(text, args.out)
    return EXIT_OK if match else EXIT_USAGE


def cmd_efficiency(args) -> int:
    eta = efficiency_exact(PRESENT_PROTOCOL)
    rows = [dict(r, efficiency_percent=percent(r["efficiency"])) for r in COMPARISON_TABLE]
    if args.format == "csv":
        text = _csv(rows, ["protocol", "quantum_resource", "efficiency", "efficiency_percent",
                           "quantum_measurement", "information_leakage"])
    else:
        text = _dump_json({
            "schema_version": SCHEMA_VERSION,
            "command": "efficiency",
            "present": {"b_s": PRESENT_PROTOCOL.b_s, "q_t": PRESENT_PROTOCOL.q_t, "b_t": PRESENT_PROTOCOL.b_t,
                        "efficiency": efficiency(PRESENT_PROTOCOL), "exact": str(eta),
                        "percent": percent(float(eta))},
            "comparison": rows,
        })
    _emit(text, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qdcavity", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, config_required=False):
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
        if config_required:
            p.add_argument("--config", metavar="PATH", required=True)
            p.add_argument("--seed", type=int, default=None,
                           help=f"override the config seed (config default {DEFAULT_SEED})")

    p = sub.add_parser("run", help="run one protocol session")
    common(p, True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("attack", help="Monte Carlo detection experiment")
    common(p, True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("leakage", help="exhaustive transcript-posterior entropy")
    common(p)
    p.set_defaults(func=cmd_leakage)

    p = sub.add_parser("tables", help="dump the collection sets and swapping table")
    common(p)
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("efficiency", help="information-theoretical efficiency comparison")
    common(p)
    p.set_defaults(func=cmd_efficiency)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trials", 1) < 1 or getattr(args, "jobs", 1) < 1:
        print("qdcavity: error: --trials and --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"qdcavity: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
