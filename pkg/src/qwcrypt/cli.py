"""Command-line experiment runner.

Exit codes: 0 success, 2 invalid configuration, 3 state-space cap exceeded.
Every output starts with a metadata block (command, resolved config, seed,
tool version) so a file can be regenerated byte-for-byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ResourceError, ValidationError
from .fock import (
    DEFAULT_MAX_CONFIGS,
    FockState,
    beamsplitter_50_50,
    check_unitary,
    format_occupations,
    haar_unitary,
    matrix_from_json,
    output_distribution,
)
from .protocol import (
    PolarizationKey,
    as_bits,
    decrypted_distribution,
    plain_distribution,
    run_round,
    verify_decryption,
)
from .security import (
    confidence_regions,
    guess_probability_bound,
    holevo_asymptotic,
    holevo_exact,
    overlap_grid,
    p_av,
    random_attack_mc,
)
from .walk import HADAMARD, WalkGraph, WalkSpec, cycle_graph, line_graph, walk_unitary

EXIT_OK, EXIT_VALIDATION, EXIT_RESOURCE = 0, 2, 3


@dataclass
class ExperimentConfig:
    command: str = ""
    seed: int = 0
    format: str = "csv"
    out: str | None = None
    log2: bool = False
    threads: int = 1
    max_configs: int = DEFAULT_MAX_CONFIGS
    m: str | None = None
    d: str | None = None
    t: int = 0
    input: str | None = None
    unitary: str | None = None
    walk: str | None = None
    coin: str = "hadamard"
    samples: int | None = None
    rounds: str = "exact"
    redact_key: bool = False
    transcript: str | None = None
    max_m: int = 10
    m_max: int = 30
    d_range: str = "2-64"
    m_range: str = "1-100"
    eps: str = "0.5,0.1,0.01"
    trials: int = 100_000

    def metadata(self) -> dict:
        cfg = {k: v for k, v in asdict(self).items() if k not in ("out", "threads", "transcript")}
        return {"command": self.command, "config": cfg, "seed": self.seed, "version": f"qwcrypt {__version__}"}


COMMAND_DEFAULTS = {
    "overlap": {"d": "1024"},
    "protocol": {"d": "4"},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ValidationError(message)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=S)
    common.add_argument("--format", choices=["csv", "json"], default=S)
    common.add_argument("--out", default=S, help="output path (default: stdout)")
    common.add_argument("--config", default=S, help="JSON file of defaults; flags override it")
    common.add_argument("--log2", action="store_true", default=S)
    common.add_argument("--threads", type=int, default=S)
    common.add_argument("--max-configs", dest="max_configs", type=int, default=S)

    parser = _Parser(prog="qwcrypt", description="Encrypted boson sampling / quantum walk experiments")
    parser.add_argument("--version", action="version", version=f"qwcrypt {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("simulate", parents=[common], help="exact output distribution or samples")
    p.add_argument("--m", default=S)
    p.add_argument("--input", default=S, help="occupations, e.g. 0110 or 0,1,1,0")
    p.add_argument("--unitary", default=S, help="identity | bs50 | haar:<seed> | matrix JSON file")
    p.add_argument("--walk", default=S, help="line<N> | cycle<N> | walk JSON file")
    p.add_argument("--coin", default=S)
    p.add_argument("--t", type=int, default=S)
    p.add_argument("--samples", type=int, default=S)

    p = sub.add_parser("protocol", parents=[common], help="run encrypted rounds and check decryption")
    p.add_argument("--m", default=S)
    p.add_argument("--d", default=S)
    p.add_argument("--input", default=S, help="logical bits, e.g. 101")
    p.add_argument("--unitary", default=S)
    p.add_argument("--rounds", default=S, help="'exact' or a number of sampled rounds")
    p.add_argument("--redact-key", dest="redact_key", action="store_true", default=S)
    p.add_argument("--transcript", default=S, help="also write the transcript JSON here")

    p = sub.add_parser("holevo", parents=[common], help="exact and asymptotic Holevo quantity")
    p.add_argument("--m", default=S, help="value, list a,b or range a-b")
    p.add_argument("--d", default=S)
    p.add_argument("--max-m", dest="max_m", type=int, default=S)

    p = sub.add_parser("overlap", parents=[common], help="log average overlap grid over (m, h)")
    p.add_argument("--d", default=S)
    p.add_argument("--m-max", dest="m_max", type=int, default=S)

    p = sub.add_parser("regions", parents=[common], help="p_av confidence regions over (d, m)")
    p.add_argument("--d-range", dest="d_range", default=S)
    p.add_argument("--m-range", dest="m_range", default=S)
    p.add_argument("--eps", default=S)

    p = sub.add_parser("attack", parents=[common], help="Monte Carlo random-basis attack")
    p.add_argument("--m", default=S)
    p.add_argument("--d", default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--input", default=S)
    return parser


def resolve_config(argv) -> ExperimentConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command", None)
    if not command:
        raise ValidationError("a subcommand is required")
    merged = dict(COMMAND_DEFAULTS.get(command, {}))
    config_path = args.pop("config", None)
    if config_path:
        try:
            file_cfg = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {config_path}: {exc}") from exc
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(file_cfg) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        merged.update(file_cfg)
    merged.update(args)
    for key in ("m", "d"):
        if merged.get(key) is not None:
            merged[key] = str(merged[key])
    return ExperimentConfig(command=command, **merged)


# ---------------------------------------------------------------------------
# parsing helpers


def parse_int_list(text: str, name: str) -> list[int]:
    """``"4"``, ``"1,2,5"`` or ``"2-64"``."""
    try:
        out = []
        for part in str(text).split(","):
            if "-" in part.strip()[1:]:
                lo, hi = part.split("-", 1)
                out.extend(range(int(lo), int(hi) + 1))
            else:
                out.append(int(part))
    except ValueError as exc:
        raise ValidationError(f"cannot parse --{name} {text!r}") from exc
    if not out:
        raise ValidationError(f"--{name} is empty")
    return out


def parse_single_int(text, name: str, minimum: int = 1) -> int:
    values = parse_int_list(text, name)
    if len(values) != 1:
        raise ValidationError(f"--{name} takes a single value")
    if values[0] < minimum:
        raise ValidationError(f"--{name} must be >= {minimum}")
    return values[0]


def require(cfg: ExperimentConfig, *names):
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise ValidationError("missing required flag(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def resolve_unitary(spec: str, m: int) -> np.ndarray:
    if spec == "identity":
        return np.eye(m, dtype=complex)
    if spec == "bs50":
        if m < 2:
            raise ValidationError("bs50 needs at least two modes")
        U = np.eye(m, dtype=complex)
        U[:2, :2] = beamsplitter_50_50()
        return U
    if spec.startswith("haar:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError as exc:
            raise ValidationError(f"bad haar seed in {spec!r}") from exc
        return haar_unitary(m, seed)
    path = Path(spec)
    if not path.is_file():
        raise ValidationError(f"unknown unitary {spec!r} (identity, bs50, haar:<seed> or a JSON file)")
    try:
        U = matrix_from_json(json.loads(path.read_text()))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"cannot parse matrix file {spec}: {exc}") from exc
    U = check_unitary(U)
    if U.shape[0] != m:
        raise ValidationError(f"matrix in {spec} acts on {U.shape[0]} modes, expected {m}")
    return U


def resolve_walk(cfg: ExperimentConfig) -> WalkSpec:
    name = cfg.walk
    for prefix, builder in (("line", line_graph), ("cycle", cycle_graph)):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            graph = builder(int(name[len(prefix):]))
            break
    else:
        path = Path(name)
        if not path.is_file():
            raise ValidationError(f"unknown walk {name!r} (line<N>, cycle<N> or a JSON file)")
        data = json.loads(path.read_text())
        if "graph" in data:
            spec = WalkSpec.from_json(data)
            return WalkSpec(spec.graph, spec.coins, cfg.t)
        graph = WalkGraph.from_json(data)
    if cfg.coin != "hadamard":
        raise ValidationError(f"unknown coin {cfg.coin!r}; built-in walks support 'hadamard'")
    if set(graph.degrees) != {2}:
        raise ValidationError("the hadamard coin needs every vertex to have degree 2")
    return WalkSpec.uniform(graph, HADAMARD, cfg.t)


# ---------------------------------------------------------------------------
# output


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if x == float("-inf"):
            return "-inf"
        return format(x, ".12g")
    return str(x)


def _json_value(x):
    if isinstance(x, (float, np.floating)):
        return fmt(x) if not np.isfinite(x) else float(fmt(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def render(cfg: ExperimentConfig, columns, rows, extra: dict | None = None) -> str:
    meta = cfg.metadata()
    if extra:
        meta.update({k: v for k, v in extra.items() if k != "transcript"})
    if cfg.format == "json":
        doc = {"metadata": meta, "columns": list(columns),
               "rows": [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]}
        if extra and "transcript" in extra:
            doc["transcript"] = extra["transcript"]
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    buf = io.StringIO()
    for key, value in meta.items():
        text = json.dumps(value, sort_keys=True) if isinstance(value, (dict, list)) else fmt(value)
        buf.write(f"# {key}: {text}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def emit(cfg: ExperimentConfig, text: str):
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); silence the flush at exit
            os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())


# ---------------------------------------------------------------------------
# commands


def cmd_simulate(cfg: ExperimentConfig) -> str:
    require(cfg, "input")
    if (cfg.unitary is None) == (cfg.walk is None):
        raise ValidationError("give exactly one of --unitary or --walk")
    state = FockState.parse(cfg.input)
    m = state.n_modes
    if cfg.m is not None and parse_single_int(cfg.m, "m") != m:
        raise ValidationError(f"--m {cfg.m} does not match the {m}-mode input")
    if cfg.walk is not None:
        if cfg.t < 0:
            raise ValidationError("--t must be >= 0")
        U = walk_unitary(resolve_walk(cfg))
        if U.shape[0] != m:
            raise ValidationError(f"walk has {U.shape[0]} modes but the input has {m}")
    else:
        U = resolve_unitary(cfg.unitary, m)
    dist = output_distribution(U, state, cfg.max_configs)
    if cfg.samples is None:
        return render(cfg, ["state", "probability"], dist.rows())
    if cfg.samples < 1:
        raise ValidationError("--samples must be >= 1")
    draws = dist.sample(np.random.default_rng(cfg.seed), cfg.samples)
    counts: dict[tuple, int] = {}
    for s in draws:
        counts[s] = counts.get(s, 0) + 1
    rows = [(format_occupations(s), n, n / cfg.samples) for s, n in sorted(counts.items())]
    return render(cfg, ["state", "count", "frequency"], rows)


def cmd_protocol(cfg: ExperimentConfig) -> str:
    d = parse_single_int(cfg.d, "d")
    if cfg.input is not None:
        bits = as_bits(cfg.input)
        if cfg.m is not None and parse_single_int(cfg.m, "m") != len(bits):
            raise ValidationError(f"--m {cfg.m} does not match the {len(bits)}-bit input")
    else:
        require(cfg, "m")
        m = parse_single_int(cfg.m, "m")
        bits = tuple((j + 1) % 2 for j in range(m))
    m = len(bits)
    U = resolve_unitary(cfg.unitary or f"haar:{cfg.seed}", m)
    rng = np.random.default_rng(cfg.seed)
    if cfg.rounds == "exact":
        n_rounds = None
    else:
        try:
            n_rounds = int(cfg.rounds)
        except ValueError as exc:
            raise ValidationError("--rounds must be 'exact' or a positive integer") from exc
        if n_rounds < 1:
            raise ValidationError("--rounds must be 'exact' or a positive integer")

    plain = plain_distribution(U, bits, cfg.max_configs)
    pattern, transcript = run_round(bits, d, U, rng)
    report = {"tv_distance": verify_decryption(bits, d, U), "messages": len(transcript.messages)}
    if not cfg.redact_key:
        report["key"] = transcript.key
    if n_rounds is None:
        decrypted = decrypted_distribution(bits, PolarizationKey(transcript.key, d), U)
        keys = set(decrypted.as_dict()) | set(plain.as_dict())
        rows = [(format_occupations(s), decrypted.probability(s), plain.probability(s)) for s in sorted(keys)]
        columns = ["pattern", "decrypted_probability", "plain_probability"]
    else:
        counts = {pattern: 1}
        most_messages = len(transcript.messages)
        for _ in range(n_rounds - 1):
            result, t = run_round(bits, d, U, rng)
            counts[result] = counts.get(result, 0) + 1
            most_messages = max(most_messages, len(t.messages))
        report["messages"] = most_messages
        keys = set(counts) | set(plain.as_dict())
        rows = [(format_occupations(s), counts.get(s, 0) / n_rounds, plain.probability(s)) for s in sorted(keys)]
        report["tv_empirical"] = 0.5 * sum(abs(r[1] - r[2]) for r in rows)
        columns = ["pattern", "empirical_frequency", "plain_probability"]
    transcript_json = transcript.to_json(redact_key=cfg.redact_key)
    if cfg.transcript:
        Path(cfg.transcript).write_text(json.dumps(transcript_json, indent=2, sort_keys=True) + "\n")
    return render(cfg, columns, rows, {**report, "transcript": transcript_json})


def cmd_holevo(cfg: ExperimentConfig) -> str:
    require(cfg, "m", "d")
    ms, ds = parse_int_list(cfg.m, "m"), parse_int_list(cfg.d, "d")
    if min(ms) < 1 or min(ds) < 1:
        raise ValidationError("--m and --d must be >= 1")
    if max(ms) > cfg.max_m:
        raise ResourceError(f"m={max(ms)} exceeds the exact-mode cap --max-m={cfg.max_m}")
    rows = [(m, d, holevo_exact(m, d, max_m=cfg.max_m), holevo_asymptotic(m)) for m in ms for d in ds]
    return render(cfg, ["m", "d", "chi_exact", "chi_asymptotic"], rows)


def cmd_overlap(cfg: ExperimentConfig) -> str:
    d = parse_single_int(cfg.d, "d")
    rows = overlap_grid(cfg.m_max, d, log2=cfg.log2)
    return render(cfg, ["m", "h", "log_overlap"], rows)


def cmd_regions(cfg: ExperimentConfig) -> str:
    try:
        eps = [float(e) for e in cfg.eps.split(",")]
    except ValueError as exc:
        raise ValidationError(f"cannot parse --eps {cfg.eps!r}") from exc
    d_range, m_range = parse_int_list(cfg.d_range, "d-range"), parse_int_list(cfg.m_range, "m-range")
    if min(d_range) < 1 or min(m_range) < 1:
        raise ValidationError("ranges must be >= 1")
    cells = confidence_regions(d_range, m_range, eps)
    rows = [(c.d, c.m, c.p_av, "none" if c.epsilon is None else fmt(c.epsilon)) for c in cells]
    return render(cfg, ["d", "m", "p_av", "epsilon_class"], rows)


def cmd_attack(cfg: ExperimentConfig) -> str:
    require(cfg, "m", "d")
    m, d = parse_single_int(cfg.m, "m"), parse_single_int(cfg.d, "d")
    bits = as_bits(cfg.input) if cfg.input is not None else tuple((j + 1) % 2 for j in range(m))
    if cfg.trials < 1:
        raise ValidationError("--trials must be >= 1")
    if cfg.threads < 1:
        raise ValidationError("--threads must be >= 1")
    res = random_attack_mc(m, d, bits, cfg.trials, seed=cfg.seed, threads=cfg.threads)
    columns = ["m", "d", "trials", "exact_rate", "exact_se", "complement_rate", "complement_se",
               "p_av", "guess_bound"]
    row = (m, d, cfg.trials, res.exact_rate, res.exact_se, res.complement_rate, res.complement_se,
           p_av(m, d), guess_probability_bound(m))
    return render(cfg, columns, [row])


COMMANDS = {
    "simulate": cmd_simulate,
    "protocol": cmd_protocol,
    "holevo": cmd_holevo,
    "overlap": cmd_overlap,
    "regions": cmd_regions,
    "attack": cmd_attack,
}


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        if cfg.format not in ("csv", "json"):
            raise ValidationError(f"unknown format {cfg.format!r}")
        text = COMMANDS[cfg.command](cfg)
    except ResourceError as exc:
        print(f"qwcrypt: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValidationError, ValueError, TypeError) as exc:
        print(f"qwcrypt: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    emit(cfg, text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
