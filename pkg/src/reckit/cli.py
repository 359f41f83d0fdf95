"""Command line front end.

Subcommands:

* ``encode`` / ``decode``: run the coders over a JSON model file, reading
  and writing binary message files plus a text sample file (one
  ``float.hex() repr(float)`` pair per line, so round trips can be
  compared byte for byte). Symbol i of a multi-symbol message uses the
  stream derived from the seed by its index.
* ``bench-runtime`` / ``bench-bias`` / ``bench-modes``: read an
  experiment config JSON and write the result CSV.
* ``verify``: run Monte-Carlo property suites; exits 1 on violation.
* ``isokl``: solve the constant-divergence parameterizations and print
  the resulting pair as JSON.

Usage problems (bad flags, malformed config or model files, unreadable
messages) exit with status 2; a failed verification exits with 1.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from .bench import (
    ExperimentConfig,
    run_bias_grid,
    run_mode_sweep,
    run_runtime_grid,
    rows_to_csv,
    summarize_rows,
    verify_shrinkage,
)
from .bitstream import (
    BitReader,
    BitWriter,
    MODE_BLOCK,
    MODE_EXACT,
    MessageFrame,
    read_message,
    write_message,
)
from .coders import (
    Variant,
    decode,
    encode_astar,
    encode_dad,
    encode_mrc,
    encode_pfr,
)
from .distributions import Gaussian, PairSpec, Uniform, distribution_from_dict
from .errors import DomainError, RecError
from .isokl import (
    BlockCodecConfig,
    decode_block_vector,
    encode_block_vector,
    gaussian_from_kl_dinf,
    gaussian_from_mean_kl,
    load_block_model,
    uniform_from_mean_kl,
)
from .randomness import derive_seed
from .tree import PartitionKind

_EXACT_KINDS = {
    "as": PartitionKind.SAMPLE_SPLIT,
    "ad": PartitionKind.DYADIC,
    "pfr": PartitionKind.GLOBAL_BOUND,
}


def _load_json(path: str) -> dict:
    with open(path) as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: {exc}") from None


def _load_model(path: str) -> PairSpec:
    data = _load_json(path)
    if "target" in data and "proposal" in data:
        return PairSpec.from_dict(data)
    if "family" in data:
        # A bare distribution acts as the proposal of a degenerate pair;
        # enough for decoding, which never touches the target.
        dist = distribution_from_dict(data)
        return PairSpec(dist, dist)
    raise DomainError(f"{path}: expected a pair or a single distribution object")


def _samples_text(xs: Sequence[float]) -> str:
    return "".join(f"{x.hex()} {x!r}\n" for x in xs)


def _write_samples(path: str, xs: Sequence[float]) -> None:
    with open(path, "w") as fh:
        fh.write(_samples_text(xs))


def _cmd_encode(args: argparse.Namespace) -> int:
    if args.block_model:
        blocks, permutation = load_block_model(_load_json(args.block_model))
        config = BlockCodecConfig(args.extra_bits)
        data = encode_block_vector(blocks, config, args.seed)
        with open(args.out, "wb") as fh:
            fh.write(data)
        if args.samples:
            ordered = _file_order(
                decode_block_vector(blocks, config, data, args.seed), permutation
            )
            _write_samples(args.samples, ordered)
        print(f"wrote {len(data)} bytes ({sum(len(b) for b in blocks)} coordinates)")
        return 0

    pair = _load_model(args.model)
    if args.exact is None and args.limited is None:
        raise DomainError("encode needs --exact or --limited (or --block-model)")
    writer = BitWriter()
    samples: list[float] = []
    if args.exact is not None:
        kind = _EXACT_KINDS[args.exact]
        codes = []
        for i in range(args.count):
            code, x, _ = encode_astar(pair, kind, derive_seed(args.seed, i))
            codes.append(code)
            samples.append(x)
        write_message(MessageFrame(MODE_EXACT, codes[0].variant, tuple(codes)), writer)
    else:
        if args.budget is None:
            raise DomainError("--limited needs --budget")
        variant = Variant.DAD_STAR if args.limited == "dad" else Variant.MRC
        codes = []
        for i in range(args.count):
            seed_i = derive_seed(args.seed, i)
            if variant is Variant.DAD_STAR:
                code, x, _ = encode_dad(pair, seed_i, args.budget)
            else:
                code, x, _ = encode_mrc(pair, seed_i, args.budget)
            codes.append(code)
            samples.append(x)
        write_message(
            MessageFrame(MODE_BLOCK, variant, tuple(codes), args.budget), writer
        )
    data = writer.getvalue()
    with open(args.out, "wb") as fh:
        fh.write(data)
    if args.samples:
        _write_samples(args.samples, samples)
    print(f"wrote {len(data)} bytes ({len(samples)} symbols)")
    return 0


def _file_order(samples: Sequence[float], permutation: Sequence[int]) -> list[float]:
    out = [0.0] * len(samples)
    for block_major, file_pos in enumerate(permutation):
        out[file_pos] = samples[block_major]
    return out


def _cmd_decode(args: argparse.Namespace) -> int:
    with open(args.infile, "rb") as fh:
        data = fh.read()
    if args.block_model:
        blocks, permutation = load_block_model(_load_json(args.block_model))
        config = BlockCodecConfig(args.extra_bits)
        samples = _file_order(
            decode_block_vector(blocks, config, data, args.seed), permutation
        )
    else:
        pair = _load_model(args.model)
        frame = read_message(BitReader(data))
        samples = [
            decode(pair.proposal, code, derive_seed(args.seed, i))
            for i, code in enumerate(frame.codes)
        ]
    _write_samples(args.samples, samples)
    print(f"decoded {len(samples)} symbols")
    return 0


def _resolve_out(args: argparse.Namespace, config: ExperimentConfig) -> str:
    out = args.out or config.output
    if not out:
        raise DomainError("no output path: pass --out or set 'output' in the config")
    return out


def _run_bench(args: argparse.Namespace, runner) -> int:
    config = ExperimentConfig.from_dict(_load_json(args.config))
    out = _resolve_out(args, config)
    rows = runner(config)
    with open(out, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))
    errors = sum(1 for r in rows if r.error is not None)
    print(f"wrote {len(rows)} rows to {out}" + (f" ({errors} errored)" if errors else ""))
    for entry in summarize_rows(rows):
        cell = "{algorithm:>4} {family:<15} kl={d_kl_nats:<8g} dinf={d_inf_nats:<8g}".format(
            **entry
        )
        extras = ""
        if entry["n_modes"] is not None:
            extras += f" modes={entry['n_modes']}"
        if entry["t_extra_bits"] is not None:
            extras += f" t={entry['t_extra_bits']}"
        stats = " steps mean={steps_mean:.2f} q1={steps_q1:g} med={steps_median:g} q3={steps_q3:g}".format(
            **entry
        )
        if "bias_mean" in entry:
            stats += f" bias={entry['bias_mean']:+.4f}±{entry['bias_se']:.4f}"
        print(cell + extras + stats)
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    failures = 0
    if args.suite in ("shrinkage", "all"):
        for kind in (PartitionKind.SAMPLE_SPLIT, PartitionKind.DYADIC):
            report = verify_shrinkage(kind, args.depth_max, args.trials, args.seed)
            status = "ok" if report.passed else "VIOLATED"
            print(f"shrinkage {kind.value}: {status}")
            for d, mass, bound in zip(report.depths, report.mean_mass, report.bounds):
                print(f"  depth {d:>2}: mean mass {mass:.6f}  bound {bound:.6f}")
            if not report.passed:
                failures += 1
    if args.suite in ("roundtrip", "all"):
        failures += _verify_roundtrip(args.trials, args.seed)
    return 1 if failures else 0


def _verify_roundtrip(trials: int, seed: int) -> int:
    mean, variance = gaussian_from_kl_dinf(1.0, 2.0)
    pair = PairSpec(Gaussian(mean, variance), Gaussian(0.0, 1.0))
    n = max(10, min(trials, 200))
    bad = 0
    for i in range(n):
        s = derive_seed(seed, i)
        for name, enc in (
            ("as", lambda: encode_astar(pair, PartitionKind.SAMPLE_SPLIT, s)),
            ("ad", lambda: encode_astar(pair, PartitionKind.DYADIC, s)),
            ("pfr", lambda: encode_pfr(pair, s)),
            ("dad", lambda: encode_dad(pair, s, 8)),
            ("mrc", lambda: encode_mrc(pair, s, 8)),
        ):
            code, x, _ = enc()
            if decode(pair.proposal, code, s) != x:
                print(f"roundtrip {name}: MISMATCH at trial {i}")
                bad += 1
    print(f"roundtrip: {'ok' if bad == 0 else 'VIOLATED'} ({n} seeds x 5 coders)")
    return 1 if bad else 0


def _cmd_isokl(args: argparse.Namespace) -> int:
    if args.kl is not None or args.dinf is not None:
        if args.kl is None or args.dinf is None:
            raise DomainError("--kl and --dinf go together")
        mean, variance = gaussian_from_kl_dinf(args.kl, args.dinf)
        pair = PairSpec(Gaussian(mean, variance), Gaussian(0.0, 1.0))
    elif args.family == "uniform":
        for name in ("prior_center", "prior_width", "kappa"):
            if getattr(args, name) is None:
                raise DomainError(f"uniform family needs --{name.replace('_', '-')}")
        target = uniform_from_mean_kl(
            args.prior_center, args.prior_width, args.kappa, args.beta
        )
        pair = PairSpec(target, Uniform(args.prior_center, args.prior_width))
    else:
        for name in ("prior_mean", "prior_std", "target_mean", "kappa"):
            if getattr(args, name) is None:
                raise DomainError(
                    f"gaussian family needs --{name.replace('_', '-')} (or --kl/--dinf)"
                )
        variance = gaussian_from_mean_kl(
            args.prior_mean, args.prior_std, args.target_mean, args.kappa
        )
        pair = PairSpec(
            Gaussian(args.target_mean, variance),
            Gaussian(args.prior_mean, args.prior_std**2),
        )
    payload = pair.to_dict()
    payload["kl_nats"] = pair.analytic_kl()
    dinf = pair.analytic_dinf()
    payload["dinf_nats"] = dinf if math.isfinite(dinf) else "inf"
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reckit",
        description="Relative entropy coding over 1-D continuous distributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    enc = sub.add_parser("encode", help="encode target samples into a message file")
    enc.add_argument("--model", help="pair model JSON (target + proposal)")
    enc.add_argument("--block-model", help="blocked coordinate model JSON")
    enc.add_argument("--seed", type=int, required=True, help="shared randomness seed")
    enc.add_argument("--exact", choices=sorted(_EXACT_KINDS), help="exact coder")
    enc.add_argument("--limited", choices=("dad", "mrc"), help="depth-limited coder")
    enc.add_argument("--budget", type=int, help="bit budget for --limited")
    enc.add_argument("--count", type=int, default=1, help="symbols to encode")
    enc.add_argument("--extra-bits", type=int, default=2,
                     help="block-model slack bits over ceil(kappa/ln 2)")
    enc.add_argument("--out", required=True, help="binary message output path")
    enc.add_argument("--samples", help="also write the encoded samples here")
    enc.set_defaults(func=_cmd_encode)

    dec = sub.add_parser("decode", help="decode a message file back to samples")
    dec.add_argument("--model", help="pair or proposal model JSON")
    dec.add_argument("--block-model", help="blocked coordinate model JSON")
    dec.add_argument("--seed", type=int, required=True)
    dec.add_argument("--in", dest="infile", required=True, help="binary message path")
    dec.add_argument("--extra-bits", type=int, default=2)
    dec.add_argument("--samples", required=True, help="decoded sample output path")
    dec.set_defaults(func=_cmd_decode)

    for name, runner, desc in (
        ("bench-runtime", run_runtime_grid, "steps/codelength grid"),
        ("bench-bias", run_bias_grid, "bias vs extra-bit slack grid"),
        ("bench-modes", run_mode_sweep, "steps vs mode count sweep"),
    ):
        bench = sub.add_parser(name, help=desc)
        bench.add_argument("--config", required=True, help="experiment config JSON")
        bench.add_argument("--out", help="CSV output path (default: config 'output')")
        bench.set_defaults(func=lambda a, r=runner: _run_bench(a, r))

    ver = sub.add_parser("verify", help="run Monte-Carlo property suites")
    ver.add_argument("--suite", choices=("shrinkage", "roundtrip", "all"),
                     default="shrinkage")
    ver.add_argument("--trials", type=int, default=2000)
    ver.add_argument("--depth-max", type=int, default=10)
    ver.add_argument("--seed", type=int, default=20260817)
    ver.set_defaults(func=_cmd_verify)

    iso = sub.add_parser(
        "isokl", help="solve constant-divergence parameterizations to model JSON"
    )
    iso.add_argument("--family", choices=("gaussian", "uniform"), default="gaussian")
    iso.add_argument("--kl", type=float, help="KL divergence in nats (with --dinf)")
    iso.add_argument("--dinf", type=float, help="ratio supremum in nats (with --kl)")
    iso.add_argument("--prior-mean", type=float)
    iso.add_argument("--prior-std", type=float)
    iso.add_argument("--target-mean", type=float)
    iso.add_argument("--prior-center", type=float)
    iso.add_argument("--prior-width", type=float)
    iso.add_argument("--kappa", type=float, help="KL divergence in nats")
    iso.add_argument("--beta", type=float, default=0.0,
                     help="where in the slack the uniform target sits")
    iso.add_argument("--out", help="write JSON here instead of stdout")
    iso.set_defaults(func=_cmd_isokl)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse signals usage errors with code 2
        return exc.code if isinstance(exc.code, int) else 2
    if args.command in ("encode", "decode"):
        if bool(args.block_model) == bool(getattr(args, "model", None)):
            print("error: pass exactly one of --model / --block-model", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except RecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
