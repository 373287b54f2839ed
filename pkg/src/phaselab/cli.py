"""Command-line experiment runner.

Each analysis is a subcommand writing a CSV whose header echoes the full
effective configuration as ``# key = value`` lines, so any output file can
be reproduced by feeding its own header back in as a config file.  Flags
override config-file entries, which override built-in defaults.

Exit codes: 0 on success, 1 on configuration errors (bad flags, bad config
file, nonconforming grid), 2 when the verification suite fails.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .analysis import (
    lemma_convergence_table,
    mi_end_to_end,
    mi_gaussian_closed_form,
    mi_monte_carlo,
    snr_penalty_db,
    spectral_loss_report,
)
from .channel import (
    ChannelConfig,
    SymbolFrame,
    apply_channel_matrix,
    equivalent_channel,
    load_constellation,
    modulate,
)
from .grid import BasisIndex, ConfigError, gram_matrix, make_grid
from .receiver import matched_filter_matrix
from .report import write_csv
from .stochastics import RandomStream, UniformCircle, WrappedGaussian, as_generator, mu_theta
from .verify import DEFAULT_SEED, run_verify

__all__ = ["load_config", "main"]

_BATCH = 4096


def _as_int(text: str) -> int:
    return int(text)


def _as_float(text: str) -> float:
    return float(text)


def _as_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _as_str(text: str) -> str:
    return text


@dataclass(frozen=True)
class _Opt:
    key: str
    convert: Callable[[str], object]
    typename: str
    default: object
    help: str
    cli: bool = True  # False for keys wired to custom flags (verify's mode)


def _schema(*opts: _Opt) -> dict[str, _Opt]:
    return {o.key: o for o in opts}


_GRID_OPTS = (
    _Opt("s", _as_float, "float", 2.0, "observation window length"),
    _Opt("t", _as_float, "float", 1.0, "symbol period"),
    _Opt("l", _as_int, "int", 256, "half the number of grid samples"),
)

_SCHEMAS: dict[str, dict[str, _Opt]] = {
    "lemma": _schema(
        _Opt("sigma2", _as_float, "float", 1.0, "phase-noise variance"),
        _Opt("k", _as_int, "int", 0, "pulse slot index"),
        _Opt("n", _as_int, "int", 0, "basis frequency index"),
        _Opt("m", _as_int, "int", 0, "basis slot index"),
        _Opt("ladder", _as_str, "start:end", "8:16",
             "base-2 exponent range of grid refinements"),
        _Opt("trials", _as_int, "int", 1000, "Monte Carlo trials per level"),
        _Opt("s", _as_float, "float", 2.0, "observation window length"),
        _Opt("t", _as_float, "float", 1.0, "symbol period"),
        _Opt("seed", _as_int, "int", DEFAULT_SEED, "master random seed"),
        _Opt("out", _as_str, "path", "lemma.csv", "output CSV path"),
    ),
    "psd": _schema(
        _Opt("sigma2", _as_float, "float", 0.6931, "phase-noise variance"),
        _Opt("snr_db", _as_float, "float", math.inf,
             "Es/N0 in dB; inf disables additive noise"),
        _Opt("es", _as_float, "float", 1.0, "average symbol energy"),
        _Opt("s", _as_float, "float", 1024.0, "observation window length"),
        _Opt("t", _as_float, "float", 1.0, "symbol period"),
        _Opt("l", _as_int, "int", 2**14, "half the number of grid samples"),
        _Opt("trials", _as_int, "int", 6, "independent waveforms to average"),
        _Opt("segment", _as_int, "int", 0, "Welch segment length; 0 = auto"),
        _Opt("seed", _as_int, "int", DEFAULT_SEED, "master random seed"),
        _Opt("out", _as_str, "path", "psd.csv", "output CSV path"),
    ),
    "mi": _schema(
        _Opt("constellation", _as_str, "name", "qpsk",
             "qpsk, bpsk, 16qam, or gaussian"),
        _Opt("sigma2", _as_float, "float", 1.0, "phase-noise variance"),
        _Opt("uniform", _as_bool, "bool", False,
             "use a uniform phase instead of the Gaussian model"),
        _Opt("snr_db", _as_float, "float", 10.0, "Es/N0 in dB"),
        _Opt("es", _as_float, "float", 1.0, "average symbol energy"),
        _Opt("trials", _as_int, "int", 200_000,
             "Monte Carlo trials (frames when pipeline is on)"),
        _Opt("pipeline", _as_bool, "bool", False,
             "simulate the waveform pipeline instead of the equivalent channel"),
        _Opt("s", _as_float, "float", 4.0, "observation window length"),
        _Opt("t", _as_float, "float", 1.0, "symbol period"),
        _Opt("l", _as_int, "int", 2**12, "half the number of grid samples"),
        _Opt("seed", _as_int, "int", DEFAULT_SEED, "master random seed"),
        _Opt("out", _as_str, "path", "mi.csv", "output CSV path"),
    ),
    "equiv": _schema(
        _Opt("constellation", _as_str, "name", "qpsk",
             "qpsk, bpsk, or 16qam (needs finite points)"),
        _Opt("sigma2", _as_float, "float", 0.5, "phase-noise variance"),
        _Opt("uniform", _as_bool, "bool", False,
             "use a uniform phase instead of the Gaussian model"),
        _Opt("snr_db", _as_float, "float", 7.0, "Es/N0 in dB"),
        _Opt("es", _as_float, "float", 1.0, "average symbol energy"),
        *_GRID_OPTS,
        _Opt("trials", _as_int, "int", 100_000, "channel realizations"),
        _Opt("seed", _as_int, "int", DEFAULT_SEED, "master random seed"),
        _Opt("out", _as_str, "path", "equiv.csv", "output CSV path"),
    ),
    "gram": _schema(
        *_GRID_OPTS,
        _Opt("nmax", _as_int, "int", 3, "largest basis frequency index"),
        _Opt("out", _as_str, "path", "gram.csv", "output CSV path"),
    ),
    "verify": _schema(
        _Opt("mode", _as_str, "quick|full", "quick",
             "verification depth", cli=False),
        _Opt("seed", _as_int, "int", DEFAULT_SEED, "master random seed"),
        _Opt("out_dir", _as_str, "path", "verify_out",
             "directory for CSVs and summary.txt"),
    ),
}

# Path-like keys carry no experiment content, so they stay out of the echoed
# header; everything else round-trips through load_config.
_NO_ECHO = frozenset({"out", "out_dir"})


def load_config(
    path: str | Path,
    schema: Mapping[str, _Opt],
    command: str,
) -> tuple[dict[str, object], dict[str, str]]:
    """Parse a ``key = value`` config file against one subcommand's schema.

    Returns the parsed values plus a map from key to ``path:line`` used to
    attribute later grid-conformity errors to their source line.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None

    values: dict[str, object] = {}
    origin: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        key, sep, val = text.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip().lower()
        val = val.strip()
        if key == "command":
            if val != command:
                raise ConfigError(
                    f"{path}:{lineno}: config is for command {val!r}, not {command!r}"
                )
            continue
        if key not in schema:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        opt = schema[key]
        try:
            values[key] = opt.convert(val)
        except ValueError:
            raise ConfigError(
                f"{path}:{lineno}: {key} expects {opt.typename}, got {val!r}"
            ) from None
        origin[key] = f"{path}:{lineno}"
    return values, origin


def _resolve(
    args: argparse.Namespace,
    command: str,
) -> tuple[dict[str, object], dict[str, str]]:
    """Defaults, then config file, then flags; returns values and origins."""
    schema = _SCHEMAS[command]
    effective = {key: opt.default for key, opt in schema.items()}
    origin: dict[str, str] = {}
    if args.config is not None:
        from_file, origin = load_config(args.config, schema, command)
        effective.update(from_file)
    for key in schema:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            effective[key] = flag_value
            origin.pop(key, None)  # flag overrides lose the file attribution
    return effective, origin


def _echo_header(command: str, effective: Mapping[str, object]) -> list[tuple[str, object]]:
    pairs: list[tuple[str, object]] = [("command", command)]
    for key in _SCHEMAS[command]:
        if key not in _NO_ECHO:
            pairs.append((key, effective[key]))
    return pairs


def _build_grid(p: Mapping[str, object], origin: Mapping[str, str]):
    try:
        return make_grid(float(p["s"]), int(p["l"]), float(p["t"]))
    except ConfigError as exc:
        for key in ("s", "t", "l"):
            if key in origin:
                raise ConfigError(f"{origin[key]}: {exc}") from None
        raise


def _n0_from_snr(es: float, snr_db: float) -> float:
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    if math.isnan(snr_db):
        raise ConfigError("snr_db must be a number or inf")
    return es / 10.0 ** (snr_db / 10.0)


def _phase_model(p: Mapping[str, object]):
    if p.get("uniform", False):
        return UniformCircle()
    return WrappedGaussian(float(p["sigma2"]))


def _parse_ladder(text: str) -> tuple[int, ...]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ConfigError(f"ladder expects 'start:end' exponents, got {text!r}")
    try:
        a, b = int(lo), int(hi)
    except ValueError:
        raise ConfigError(f"ladder exponents must be integers, got {text!r}") from None
    if not 0 < a < b:
        raise ConfigError(f"ladder needs 0 < start < end, got {text!r}")
    return tuple(2**e for e in range(a, b + 1))


# --- subcommands ---------------------------------------------------------------


def _cmd_lemma(p: Mapping[str, object], origin: Mapping[str, str]) -> int:
    ladder = _parse_ladder(str(p["ladder"]))
    idx = BasisIndex(int(p["n"]), int(p["m"]))
    table = lemma_convergence_table(
        int(p["k"]), idx, WrappedGaussian(float(p["sigma2"])),
        ladder, int(p["trials"]), RandomStream(int(p["seed"])),
        S=float(p["s"]), T=float(p["t"]),
    )
    cols = {
        "l": [r.l for r in table.rows],
        "mean_re": [float(r.mean.real) for r in table.rows],
        "mean_im": [float(r.mean.imag) for r in table.rows],
        "var": [r.variance for r in table.rows],
        "stderr": [r.stderr for r in table.rows],
        "nested_re": [float(r.nested.real) for r in table.rows],
        "nested_im": [float(r.nested.imag) for r in table.rows],
    }
    out = write_csv(str(p["out"]), cols, _echo_header("lemma", p))
    final = table.rows[-1]
    print(f"limit = {table.limit.real:+.6f}{table.limit.imag:+.6f}j")
    print(f"mean at l={final.l}: {final.mean.real:+.6f}{final.mean.imag:+.6f}j"
          f" (stderr {final.stderr:.3g})")
    print(f"wrote {out}")
    return 0


def _cmd_psd(p: Mapping[str, object], origin: Mapping[str, str]) -> int:
    grid = _build_grid(p, origin)
    es = float(p["es"])
    cfg = ChannelConfig(
        grid, WrappedGaussian(float(p["sigma2"])),
        N0=_n0_from_snr(es, float(p["snr_db"])), Es=es, seed=int(p["seed"]),
    )
    segment = int(p["segment"]) or None
    rep = spectral_loss_report(cfg, trials=int(p["trials"]), segment=segment)
    expected = math.exp(-float(p["sigma2"]))
    rows = [
        ("gain_estimate", rep.ratio),
        ("gain_expected", expected),
        ("relative_error", abs(rep.ratio - expected) / expected),
        ("band_power_clean", rep.clean.band_power(rep.bandwidth)),
        ("band_power_noisy", rep.noisy.band_power(rep.bandwidth)),
        ("floor_clean", rep.floor_clean),
        ("floor_noisy", rep.floor_noisy),
        ("bandwidth", rep.bandwidth),
        ("guard", rep.guard),
    ]
    cols = {"metric": [k for k, _ in rows], "value": [v for _, v in rows]}
    out = write_csv(str(p["out"]), cols, _echo_header("psd", p))
    print(f"estimated in-band gain = {rep.ratio:.6f} (expected {expected:.6f})")
    print(f"wrote {out}")
    return 0


def _cmd_mi(p: Mapping[str, object], origin: Mapping[str, str]) -> int:
    constellation = load_constellation(str(p["constellation"]))
    phase = _phase_model(p)
    es = float(p["es"])
    snr_db = float(p["snr_db"])
    n0 = _n0_from_snr(es, snr_db)
    trials = int(p["trials"])
    seed = int(p["seed"])

    if bool(p["pipeline"]):
        if constellation.points is None:
            raise ConfigError("the waveform pipeline needs a finite constellation")
        if n0 <= 0.0:
            raise ConfigError("the waveform pipeline needs a finite snr_db")
        grid = _build_grid(p, origin)
        cfg = ChannelConfig(grid, phase, N0=n0, Es=es, seed=seed)
        est = mi_end_to_end(cfg, constellation, trials, cfg.stream(1))
    elif constellation.points is None:
        if n0 <= 0.0:
            raise ConfigError("the closed form needs a finite snr_db")
        est = mi_gaussian_closed_form(es, n0, mu_theta(phase))
    else:
        est = mi_monte_carlo(constellation, mu_theta(phase), es, n0, trials,
                             RandomStream(seed))

    penalty = snr_penalty_db(phase)
    rows = [
        ("mi_bits", est.value),
        ("stderr", est.stderr),
        ("method", est.method),
        ("trials", est.trials),
        ("penalty_db", penalty),
        ("penalized_snr_db", snr_db - penalty),
    ]
    cols = {"metric": [k for k, _ in rows], "value": [v for _, v in rows]}
    out = write_csv(str(p["out"]), cols, _echo_header("mi", p))
    print(f"MI = {est.value:.4f} bits/symbol (stderr {est.stderr:.4f},"
          f" method {est.method})")
    print(f"wrote {out}")
    return 0


def _cmd_equiv(p: Mapping[str, object], origin: Mapping[str, str]) -> int:
    constellation = load_constellation(str(p["constellation"]))
    if constellation.points is None:
        raise ConfigError("the pipeline comparison needs a finite constellation")
    grid = _build_grid(p, origin)
    phase = _phase_model(p)
    es = float(p["es"])
    cfg = ChannelConfig(grid, phase, N0=_n0_from_snr(es, float(p["snr_db"])),
                        Es=es, seed=int(p["seed"]))
    trials = int(p["trials"])

    n_slots = grid.slots.size
    points = constellation.points
    frame = SymbolFrame(points[np.arange(n_slots) % points.size] * math.sqrt(es))
    base = modulate(frame, grid).samples

    gen = as_generator(cfg.stream(1))
    blocks = []
    done = 0
    while done < trials:
        count = min(_BATCH, trials - done)
        y = apply_channel_matrix(np.tile(base, (count, 1)), cfg, gen)
        blocks.append(matched_filter_matrix(y, grid))
        done += count
    pipe = np.concatenate(blocks, axis=0)
    oracle = equivalent_channel(np.tile(frame.symbols, (trials, 1)), cfg.mu,
                                cfg.N0, as_generator(cfg.stream(2)))

    # Finite-grid self-noise left on top of the equivalent channel's N0.
    residual = (1.0 - abs(cfg.mu) ** 2) * np.abs(frame.symbols) ** 2 \
        * grid.delta / grid.T

    cols: dict[str, list] = {
        "slot": [], "symbol_re": [], "symbol_im": [],
        "pipeline_mean_re": [], "pipeline_mean_im": [],
        "oracle_mean_re": [], "oracle_mean_im": [],
        "mean_distance": [], "mean_stderr": [],
        "pipeline_var": [], "oracle_var": [], "residual": [], "var_gap": [],
    }
    worst = 0.0
    for j, m in enumerate(frame.slots):
        zp, zo = pipe[:, j], oracle[:, j]
        mp, mo = complex(zp.mean()), complex(zo.mean())
        vp = float(np.mean(np.abs(zp - mp) ** 2))
        vo = float(np.mean(np.abs(zo - mo) ** 2))
        se_mean = math.sqrt((vp + vo) / trials)
        gap = vp - float(residual[j]) - vo
        worst = max(worst, abs(mp - mo) / se_mean if se_mean else 0.0)
        cols["slot"].append(int(m))
        cols["symbol_re"].append(float(frame.symbols[j].real))
        cols["symbol_im"].append(float(frame.symbols[j].imag))
        cols["pipeline_mean_re"].append(mp.real)
        cols["pipeline_mean_im"].append(mp.imag)
        cols["oracle_mean_re"].append(mo.real)
        cols["oracle_mean_im"].append(mo.imag)
        cols["mean_distance"].append(abs(mp - mo))
        cols["mean_stderr"].append(se_mean)
        cols["pipeline_var"].append(vp)
        cols["oracle_var"].append(vo)
        cols["residual"].append(float(residual[j]))
        cols["var_gap"].append(gap)
    out = write_csv(str(p["out"]), cols, _echo_header("equiv", p))
    print(f"largest mean deviation = {worst:.2f} standard errors over"
          f" {n_slots} slots")
    print(f"wrote {out}")
    return 0


def _cmd_gram(p: Mapping[str, object], origin: Mapping[str, str]) -> int:
    grid = _build_grid(p, origin)
    n_max = int(p["nmax"])
    if not 0 <= n_max < grid.samples_per_slot:
        raise ConfigError(
            f"nmax must lie in [0, {grid.samples_per_slot - 1}] on this grid"
        )
    indices = [BasisIndex(n, int(m))
               for n in range(n_max + 1) for m in grid.slots]
    gram = gram_matrix(indices, grid)
    deviation = float(np.abs(gram - np.eye(len(indices))).max())

    cols: dict[str, list] = {
        "n_row": [], "m_row": [], "n_col": [], "m_col": [],
        "entry_re": [], "entry_im": [],
    }
    for i, a in enumerate(indices):
        for j, b in enumerate(indices):
            cols["n_row"].append(a.n)
            cols["m_row"].append(a.m)
            cols["n_col"].append(b.n)
            cols["m_col"].append(b.m)
            cols["entry_re"].append(float(gram[i, j].real))
            cols["entry_im"].append(float(gram[i, j].imag))
    out = write_csv(str(p["out"]), cols, _echo_header("gram", p))
    print(f"{len(indices)} basis functions; worst deviation from identity"
          f" = {deviation:.3g}")
    print(f"wrote {out}")
    return 0


def _cmd_verify(p: Mapping[str, object], origin: Mapping[str, str]) -> int:
    report = run_verify(str(p["mode"]), int(p["seed"]), str(p["out_dir"]))
    print(f"summary written to {report.summary_path}")
    return report.exit_code


_COMMANDS: dict[str, Callable[[Mapping[str, object], Mapping[str, str]], int]] = {
    "lemma": _cmd_lemma,
    "psd": _cmd_psd,
    "mi": _cmd_mi,
    "equiv": _cmd_equiv,
    "gram": _cmd_gram,
    "verify": _cmd_verify,
}

_DESCRIPTIONS = {
    "lemma": "projection convergence ladder for one pulse/basis pair",
    "psd": "spectral-loss report from averaged periodograms",
    "mi": "mutual information of the phase-noise channel",
    "equiv": "distributional comparison of the pipeline against its oracle",
    "gram": "Gram matrix of the projection basis",
    "verify": "run the acceptance suite and write summary.txt",
}


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; the contract wants 1."""

    def error(self, message: str):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="phaselab",
        description="simulation laboratory for the white phase noise channel",
    )
    sub = parser.add_subparsers(dest="command", metavar="command",
                                parser_class=_Parser)
    for command, schema in _SCHEMAS.items():
        cp = sub.add_parser(command, help=_DESCRIPTIONS[command],
                            description=_DESCRIPTIONS[command])
        cp.add_argument("--config", default=None, metavar="PATH",
                        help="key = value config file; flags override it")
        for key, opt in schema.items():
            if not opt.cli:
                continue
            flag = "--" + key.replace("_", "-")
            if opt.convert is _as_bool:
                cp.add_argument(flag, default=None, help=opt.help,
                                action=argparse.BooleanOptionalAction)
            else:
                cp.add_argument(flag, default=None, type=opt.convert,
                                metavar=opt.typename.upper(), help=opt.help)
        if command == "verify":
            depth = cp.add_mutually_exclusive_group()
            depth.add_argument("--quick", dest="mode", action="store_const",
                               const="quick", default=None,
                               help="criterion-stated trial counts (default)")
            depth.add_argument("--full", dest="mode", action="store_const",
                               const="full", help="ten times the trials")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    try:
        effective, origin = _resolve(args, args.command)
        return _COMMANDS[args.command](effective, origin)
    except ValueError as exc:  # ConfigError included
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
