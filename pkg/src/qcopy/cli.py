"""Command-line experiment runner.

    qcopy mint    --n 8 --l 4 --seed 42 --out disk/
    qcopy read    disk/medium.json
    qcopy decrypt disk/medium.json --trials 1000
    qcopy verify  disk/medium.json --secrets disk/secrets.json --m 16
    qcopy attack  disk/medium.json --secrets disk/secrets.json --trials 10000 --out pirate/
    qcopy curves  --trials 100000 --out curves/

Exit codes: 0 success or accept, 1 reject, 2 usage, IO or validation error.
All output is a pure function of the arguments, independent of ``--jobs``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, adversary, analysis, experiments, storage
from .authenticate import DEFAULT_REPETITIONS, verify_medium
from .issuer import DEFAULT_KEY_LENGTH, MAX_KEY_LENGTH, make_hash_state, mint_medium
from .reader import decrypt_all, read_classical
from .streams import derive_seed, stream

EXIT_OK, EXIT_REJECT, EXIT_USAGE = 0, 1, 2

# stream tags, one per subcommand
_MINT, _READ, _DECRYPT, _VERIFY, _ATTACK, _CURVES = range(6)


class CliError(Exception):
    pass


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _key_length(text: str) -> int:
    value = _positive(text)
    if value > MAX_KEY_LENGTH:
        raise argparse.ArgumentTypeError(f"must be <= {MAX_KEY_LENGTH}, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _version_tag() -> str:
    return f"v{__version__}"


def _table_text(rows: list[dict], args, fmt: str) -> str:
    meta = {"seed": args.seed, "trials": args.trials, "version": _version_tag()}
    if fmt == "json":
        return storage.dumps({"rows": rows, "meta": meta})
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for row in rows:
        writer.writerow([_fmt(v) for v in row.values()])
    buf.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
    return buf.getvalue()


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from exc


def _emit(doc, args) -> None:
    text = storage.dumps(doc)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)


def _load(args):
    medium = storage.load_medium(args.medium)
    secrets = storage.load_secrets(args.secrets, medium) if args.secrets else None
    return medium, secrets


# -- subcommands --------------------------------------------------------------

def cmd_mint(args) -> int:
    rng = stream(args.seed, _MINT)
    if args.bits:
        if any(c not in "01" for c in args.bits):
            raise CliError("--bits must be a string of 0s and 1s")
        bits = [int(c) for c in args.bits]
        if args.n is not None and args.n != len(bits):
            raise CliError(f"--n {args.n} disagrees with {len(bits)} bits given")
    else:
        bits = rng.integers(0, 2, size=args.n or 8).tolist()
    medium, secrets = mint_medium(bits, args.l or DEFAULT_KEY_LENGTH, rng)
    out = Path(args.out or ".")
    _write(out / "medium.json", storage.dumps(storage.medium_to_dict(medium)))
    _write(out / "secrets.json", storage.dumps(storage.secrets_to_dict(secrets)))
    sys.stdout.write(storage.dumps({"medium": str(out / "medium.json"),
                                    "secrets": str(out / "secrets.json"),
                                    "n": medium.n, "l": medium.l}))
    return EXIT_OK


def cmd_read(args) -> int:
    medium, _ = _load(args)
    bits = read_classical(medium, stream(args.seed, _READ))
    _emit({"bits": bits}, args)
    return EXIT_OK


def cmd_decrypt(args) -> int:
    medium, secrets = _load(args)
    reports = decrypt_all(medium, stream(args.seed, _DECRYPT))
    doc = {
        "n": medium.n,
        "l": medium.l,
        "seed": args.seed,
        "decoded_bits": [r.decoded_bit for r in reports],
        "attempts": [r.result.attempts_used for r in reports],
        "success": [r.result.success for r in reports],
    }
    trials = args.trials or 1
    if trials > 1:
        stats = experiments.decrypt_statistics(
            medium, trials, derive_seed(args.seed, _DECRYPT), args.jobs,
            bits=secrets.bits if secrets else None,
        )
        doc["trials"] = trials
        doc["success_fraction"] = [float(p) for p in stats.per_position_success]
        doc["all_success_fraction"] = stats.all_success.p
        doc["p_success_analytic"] = analysis.cascade_success_prob(medium.l)
        if secrets:
            doc["exact_recovery_fraction"] = stats.exact_recovery.p
    _emit(doc, args)
    return EXIT_OK


def cmd_verify(args) -> int:
    medium, secrets = _load(args)
    reference = make_hash_state(secrets) if secrets else None
    m = args.m or DEFAULT_REPETITIONS
    verdict = verify_medium(medium, m, stream(args.seed, _VERIFY), reference=reference)
    doc = verdict.to_dict()
    trials = args.trials or 1
    if trials > 1:
        est = experiments.acceptance_rate(medium, m, trials, derive_seed(args.seed, _VERIFY),
                                          args.jobs, reference=reference)
        doc["trials"] = trials
        doc["acceptance_rate"] = est.p
    _emit(doc, args)
    return EXIT_OK if verdict.accepted else EXIT_REJECT


def cmd_attack(args) -> int:
    medium, secrets = _load(args)
    if secrets is None:
        raise CliError("attack needs --secrets to run the Issuer's carrier check")
    trials = args.trials or 10_000
    args.trials = trials
    outcome = adversary.measure_and_reprepare_attack(medium, secrets, stream(args.seed, _ATTACK),
                                                     args.theta_star)
    stats = experiments.attack_statistics(secrets.thetas, trials, derive_seed(args.seed, _ATTACK),
                                          args.jobs, args.theta_star)
    out = Path(args.out or ".")
    ext = "json" if args.format == "json" else "csv"
    _write(out / "pirated_medium.json", storage.dumps(storage.medium_to_dict(outcome.pirated_medium)))
    _write(out / f"attack_stats.{ext}", _table_text(list(stats.rows()), args, args.format))
    p_all = float(np.prod(adversary.fake_projection_prob(secrets.thetas, args.theta_star)))
    degenerate = [i for i, row in enumerate(stats.rows()) if row["p_analytic"] == 1.0]
    sys.stdout.write(storage.dumps({
        "passed_all": outcome.passed_all,
        "per_position_pass": outcome.per_position_pass,
        "all_pass_rate": stats.all_pass.p,
        "all_pass_analytic": p_all,
        "trials": trials,
        "degenerate_positions": degenerate,
    }))
    return EXIT_OK


def cmd_curves(args) -> int:
    trials = args.trials or 10_000
    args.trials = trials
    seed = derive_seed(args.seed, _CURVES)
    out = Path(args.out or ".")
    ext = "json" if args.format == "json" else "csv"
    tables = {
        "decryption_curve": experiments.decryption_curve(trials, seed, args.jobs),
        "swap_curve": experiments.swap_curve(trials, seed, args.jobs),
        "distance_curve": experiments.distance_curve(),
    }
    for name, rows in tables.items():
        _write(out / f"{name}.{ext}", _table_text(rows, args, args.format))
    sys.stdout.write(storage.dumps({name: str(out / f"{name}.{ext}") for name in tables}))
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="master seed (u64)")
    common.add_argument("--trials", type=_positive, default=None, help="Monte Carlo trials")
    common.add_argument("--n", type=_positive, default=None, help="positions (bits) to mint")
    common.add_argument("--l", type=_key_length, default=None, help="key-string length")
    common.add_argument("--m", type=_positive, default=None, help="SWAP-test repetitions")
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=_positive, default=1, help="worker processes")

    parser = argparse.ArgumentParser(prog="qcopy", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=_version_tag())
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mint", parents=[common], help="mint a medium and its secrets")
    p.add_argument("--bits", default=None, help="plaintext bits, e.g. 0110 (default: random)")
    p.set_defaults(func=cmd_mint)

    for name, func, helptext in (
        ("read", cmd_read, "read data qubits without decrypting"),
        ("decrypt", cmd_decrypt, "decrypt every position"),
        ("verify", cmd_verify, "authenticate the medium by SWAP tests"),
        ("attack", cmd_attack, "copy the medium by measure-and-reprepare"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("medium", help="medium JSON file")
        p.add_argument("--secrets", default=None, help="Issuer secrets JSON file")
        p.set_defaults(func=func)
        if name == "attack":
            p.add_argument("--theta-star", type=float, default=0.0,
                           help="re-preparation angle for outcome 0")

    p = sub.add_parser("curves", parents=[common], help="emit decryption/SWAP/distance curves")
    p.set_defaults(func=cmd_curves)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CliError, storage.MediumFormatError, OSError, ValueError) as exc:
        print(f"qcopy {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
