"""Command-line pipelines: corpus synthesis, oracle generation, program
validation and transforms, delay/BLEU reports, simulation, training.

Every subcommand is deterministic given --seed. Runs that write to a file
also write a JSON manifest (resolved flags plus input digests) next to it;
identical manifests imply identical outputs. Programs are one "R"/"W" string
per line; reports are TSV.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .corpus import (
    SyntheticTaskConfig,
    Vocabulary,
    attach_alignments,
    gen_synthetic,
    parse_parallel,
    split_lines,
)
from .imitation import (
    Example,
    TrainConfig,
    evaluate,
    load_bundle,
    save_bundle,
    train,
    warm_start_wait_k,
)
from .metrics import (
    average_lagging,
    average_proportion,
    corpus_bleu,
    delay_report,
    differentiable_al,
)
from .oracle import OracleConfig, generate_oracle, oracle_corpus
from .program import (
    add_delay,
    format_program,
    parse_program,
    perturb_prog_valid,
    validity,
    wait_k_program,
)
from .seeding import stream
from .simulate import SimConfig, playback, render_trace, run_episode, scoring_lag


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _digest(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _emit_manifest(args: argparse.Namespace, inputs: dict[str, str], out: str | None) -> None:
    """Write the run manifest next to the primary output; stdout-only runs
    keep pipes clean and skip it unless --manifest names a path."""
    manifest_path = getattr(args, "manifest", None)
    if manifest_path is None and out is not None and out != "-":
        manifest_path = out + ".manifest.json"
    if manifest_path is None:
        return
    config = {
        k: v
        for k, v in vars(args).items()
        if k not in ("func", "manifest") and not callable(v)
    }
    payload = {
        "tool": "simtkit",
        "version": __version__,
        "subcommand": args.func.__name__.removeprefix("cmd_"),
        "config": config,
        "inputs": {
            name: {"path": path, "sha256": _digest(path)}
            for name, path in inputs.items()
            if path and path != "-"
        },
    }
    Path(manifest_path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def _load_corpus(src: str, tgt: str, vocab: Vocabulary, align: str | None = None, *, extend=True):
    pairs = parse_parallel(_read_text(src), _read_text(tgt), vocab, extend=extend)
    if align is not None:
        pairs = attach_alignments(pairs, _read_text(align))
    return pairs


def _load_programs(path: str) -> list:
    return [parse_program(line) for line in split_lines(_read_text(path))]


def _format_programs(programs) -> str:
    return "".join(format_program(p) + "\n" for p in programs)


def cmd_synth(args) -> int:
    cfg = SyntheticTaskConfig(
        vocab_size=args.vocab_size,
        min_len=args.min_len,
        max_len=args.max_len,
        reorder_rule=args.reorder.replace("-", "_"),
        seed=args.seed,
    )
    vocab = Vocabulary()
    pairs = gen_synthetic(cfg, args.n, vocab)
    prefix = args.out_prefix
    src_path, tgt_path = prefix + ".src", prefix + ".tgt"
    align_path, vocab_path = prefix + ".align", prefix + ".vocab"
    _write_text(src_path, "".join(" ".join(vocab.decode(p.source)) + "\n" for p in pairs))
    _write_text(tgt_path, "".join(" ".join(vocab.decode(p.target)) + "\n" for p in pairs))
    _write_text(align_path, "".join(p.alignment.to_pharaoh() + "\n" for p in pairs))
    vocab.save(vocab_path)
    manifest = {
        "tool": "simtkit",
        "version": __version__,
        "subcommand": "synth",
        "config": {k: v for k, v in vars(args).items() if not callable(v)},
        "corpus": {
            "n_pairs": len(pairs),
            "source_tokens": sum(len(p.source) for p in pairs),
            "target_tokens": sum(len(p.target) for p in pairs),
            "vocabulary": vocab_path,
            "files": {"src": src_path, "tgt": tgt_path, "align": align_path},
        },
    }
    Path(prefix + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return 0


def cmd_oracle(args) -> int:
    vocab = Vocabulary()
    pairs = _load_corpus(args.src, args.tgt, vocab, args.align)
    cfg = OracleConfig(anchor_endpoints=not args.no_anchor)
    programs, stats = oracle_corpus(pairs, cfg)
    _write_text(args.out, _format_programs(programs))
    _emit_manifest(args, {"src": args.src, "tgt": args.tgt, "align": args.align}, args.out)
    stats_text = "".join(f"{k}\t{v}\n" for k, v in asdict(stats).items())
    _write_text(args.stats, stats_text)
    if cfg.anchor_endpoints:
        bad = [
            i
            for i, (pair, program) in enumerate(zip(pairs, programs))
            if not validity(program, len(pair.source), len(pair.target)).boundary_valid
        ]
        if bad:
            print(f"internal error: invalid anchored programs at lines {bad[:5]}", file=sys.stderr)
            return 1
    return 0


def cmd_validate(args) -> int:
    vocab = Vocabulary()
    pairs = _load_corpus(args.src, args.tgt, vocab)
    programs = _load_programs(args.programs)
    if len(programs) != len(pairs):
        print(
            f"line-count mismatch: {len(programs)} programs vs {len(pairs)} pairs",
            file=sys.stderr,
        )
        return 2
    rows = ["index\tcount_valid\tboundary_valid\treads\twrites"]
    n_bad = 0
    for i, (pair, program) in enumerate(zip(pairs, programs)):
        rep = validity(program, len(pair.source), len(pair.target))
        n_bad += not rep.boundary_valid
        rows.append(
            f"{i}\t{int(rep.count_valid)}\t{int(rep.boundary_valid)}"
            f"\t{rep.read_count}\t{rep.write_count}"
        )
    rows.append(f"# valid {len(pairs) - n_bad}/{len(pairs)}")
    _write_text(args.out, "\n".join(rows) + "\n")
    _emit_manifest(
        args, {"programs": args.programs, "src": args.src, "tgt": args.tgt}, args.out
    )
    return 1 if n_bad else 0


def cmd_perturb(args) -> int:
    rng = stream(args.seed, "perturb")
    programs = [
        perturb_prog_valid(p, args.beta3, rng) for p in _load_programs(args.programs)
    ]
    _write_text(args.out, _format_programs(programs))
    _emit_manifest(args, {"programs": args.programs}, args.out)
    return 0


def cmd_waitk(args) -> int:
    vocab = Vocabulary()
    pairs = _load_corpus(args.src, args.tgt, vocab)
    programs = [wait_k_program(args.k, len(p.source), len(p.target)) for p in pairs]
    _write_text(args.out, _format_programs(programs))
    _emit_manifest(args, {"src": args.src, "tgt": args.tgt}, args.out)
    return 0


def cmd_delay(args) -> int:
    programs = [add_delay(p, args.d) for p in _load_programs(args.programs)]
    _write_text(args.out, _format_programs(programs))
    _emit_manifest(args, {"programs": args.programs}, args.out)
    return 0


def cmd_metrics(args) -> int:
    vocab = Vocabulary()
    pairs = _load_corpus(args.src, args.tgt, vocab)
    programs = _load_programs(args.programs)
    if len(programs) != len(pairs):
        print(
            f"line-count mismatch: {len(programs)} programs vs {len(pairs)} pairs",
            file=sys.stderr,
        )
        return 2
    hyps = split_lines(_read_text(args.hyp)) if args.hyp else None
    refs = split_lines(_read_text(args.tgt)) if args.hyp else None
    # column order follows the delay-report convention: BLEU DAL AL AP
    header = ("sentence\tbleu\tdal\tal\tap" if args.hyp else "sentence\tdal\tal\tap")
    rows = [header]
    ap_sum = al_sum = dal_sum = 0.0
    for i, (pair, program) in enumerate(zip(pairs, programs)):
        report = delay_report(program, len(pair.source), len(pair.target))
        ap_sum += report.ap
        al_sum += report.al
        dal_sum += report.dal
        if args.hyp:
            rows.append(f"{i}\t\t{report.dal:.6f}\t{report.al:.6f}\t{report.ap:.6f}")
        else:
            rows.append(f"{i}\t{report.dal:.6f}\t{report.al:.6f}\t{report.ap:.6f}")
    n = max(len(pairs), 1)
    if args.hyp:
        bleu = corpus_bleu([h.split() for h in hyps], [r.split() for r in refs]).score
        rows.append(
            f"mean\t{bleu:.4f}\t{dal_sum / n:.6f}\t{al_sum / n:.6f}\t{ap_sum / n:.6f}"
        )
    else:
        rows.append(f"mean\t{dal_sum / n:.6f}\t{al_sum / n:.6f}\t{ap_sum / n:.6f}")
    _write_text(args.out, "\n".join(rows) + "\n")
    _emit_manifest(
        args,
        {"programs": args.programs, "src": args.src, "tgt": args.tgt, "hyp": args.hyp},
        args.out,
    )
    return 0


def cmd_trace(args) -> int:
    src_lines = split_lines(_read_text(args.src))
    out_lines = split_lines(_read_text(args.tgt))
    ref_lines = split_lines(_read_text(args.ref)) if args.ref else None
    programs = _load_programs(args.programs)
    blocks = []
    for i, program in enumerate(programs):
        blocks.append(
            render_trace(
                program,
                src_lines[i].split(),
                out_lines[i].split(),
                ref_lines[i].split() if ref_lines else None,
            )
        )
    _write_text(args.out, "\n\n".join(blocks) + "\n")
    _emit_manifest(
        args, {"programs": args.programs, "src": args.src, "tgt": args.tgt}, args.out
    )
    return 0


def cmd_simulate(args) -> int:
    pair = load_bundle(args.policy)
    src_lines = split_lines(_read_text(args.src))
    sources = [
        tuple(pair.vocab.lookup(t) for t in line.split()) for line in src_lines
    ]
    programs = _load_programs(args.programs) if args.programs else None
    cfg = SimConfig(decoding=args.decoding)
    rng = stream(args.seed, "sample") if args.decoding == "sample" else None
    interpreter = pair.interpreter_policy()
    programmer = pair.programmer_policy()
    rows = ["program\thypothesis\tterminated\tap\tal\tdal"]
    for i, source in enumerate(sources):
        if programs is not None:
            transcript = playback(programs[i], interpreter, source, cfg, rng)
        else:
            transcript = run_episode(programmer, interpreter, source, cfg, rng)
        g = scoring_lag(transcript, len(source))
        if g:
            ap = average_proportion(g, len(source), len(g))
            al = average_lagging(g, len(source), len(g))
            dal = differentiable_al(g, len(source), len(g))
            delay = f"{ap:.6f}\t{al:.6f}\t{dal:.6f}"
        else:
            delay = "\t\t"
        hyp = " ".join(pair.vocab.decode(transcript.hypothesis))
        rows.append(
            f"{format_program(transcript.program)}\t{hyp}\t{transcript.terminated}\t{delay}"
        )
    _write_text(args.out, "\n".join(rows) + "\n")
    _emit_manifest(
        args,
        {"policy": args.policy, "src": args.src, "programs": args.programs},
        args.out,
    )
    return 0


def _examples_from_files(src, tgt, align, vocab, *, extend=True):
    pairs = _load_corpus(src, tgt, vocab, align, extend=extend)
    programs, _ = oracle_corpus(pairs)
    return [Example(p, a) for p, a in zip(pairs, programs)]


def cmd_train(args) -> int:
    vocab = Vocabulary()
    train_ex = _examples_from_files(args.src, args.tgt, args.align, vocab)
    dev_ex = _examples_from_files(args.dev_src, args.dev_tgt, args.dev_align, vocab)
    cfg = TrainConfig(
        beta1=args.beta1,
        beta2=args.beta2,
        beta3=args.beta3,
        alpha1=args.alpha,
        alpha2=args.alpha,
        epochs=args.epochs,
        seed=args.seed,
    )
    if args.warm_start_k:
        result = warm_start_wait_k(
            train_ex, dev_ex, vocab, args.warm_start_k, cfg, features=args.features
        )
        history = result.phase1.history + result.final.history
        pair = result.pair
    else:
        outcome = train(train_ex, dev_ex, vocab, cfg, features=args.features)
        history = outcome.history
        pair = outcome.pair
    save_bundle(pair, args.out)
    lines = ["epoch\tprog_loss\tintp_loss\tprog_ppl\tintp_ppl\tprog_lr\tintp_lr"]
    for h in history:
        lines.append(
            f"{h.epoch}\t{h.programmer_loss:.6f}\t{h.interpreter_loss:.6f}"
            f"\t{h.programmer_ppl:.6f}\t{h.interpreter_ppl:.6f}"
            f"\t{h.programmer_lr:.6g}\t{h.interpreter_lr:.6g}"
        )
    _write_text(args.history, "\n".join(lines) + "\n")
    _emit_manifest(
        args,
        {
            "src": args.src,
            "tgt": args.tgt,
            "align": args.align,
            "dev_src": args.dev_src,
            "dev_tgt": args.dev_tgt,
            "dev_align": args.dev_align,
        },
        args.out,
    )
    return 0


def cmd_evaluate(args) -> int:
    pair = load_bundle(args.policy)
    dev_ex = _examples_from_files(
        args.src, args.tgt, args.align, pair.vocab, extend=False
    )
    cfg = SimConfig(decoding=args.decoding)
    rng = stream(args.seed, "sample") if args.decoding == "sample" else None
    report = evaluate(pair, dev_ex, cfg, rng=rng)
    text = "".join(f"{k}\t{v}\n" for k, v in asdict(report).items())
    _write_text(args.out, text)
    _emit_manifest(
        args,
        {"policy": args.policy, "src": args.src, "tgt": args.tgt, "align": args.align},
        args.out,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="simtkit",
        description="READ/WRITE action-program toolkit for simultaneous translation",
    )
    parser.add_argument("--version", action="version", version=f"simtkit {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--manifest", help="explicit manifest path")
        return p

    p = add("synth", cmd_synth, "generate a synthetic corpus with gold alignments")
    p.add_argument("--vocab-size", type=int, default=64)
    p.add_argument("--min-len", type=int, default=5)
    p.add_argument("--max-len", type=int, default=15)
    p.add_argument("--reorder", choices=["monotone", "final-to-second"], default="monotone")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-prefix", required=True)

    p = add("oracle", cmd_oracle, "derive oracle programs from alignments")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--align", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--stats", default="-")
    p.add_argument("--no-anchor", action="store_true")

    p = add("validate", cmd_validate, "check programs against sentence lengths")
    p.add_argument("--programs", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--out", default="-")

    p = add("perturb", cmd_perturb, "validity-preserving program permutation")
    p.add_argument("--programs", required=True)
    p.add_argument("--beta3", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")

    p = add("waitk", cmd_waitk, "build offline wait-k programs")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--out", default="-")

    p = add("delay", cmd_delay, "move the last READ to the front, d times")
    p.add_argument("--programs", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out", default="-")

    p = add("metrics", cmd_metrics, "per-sentence and corpus delay metrics")
    p.add_argument("--programs", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--hyp", help="hypotheses file; adds corpus BLEU")
    p.add_argument("--out", default="-")

    p = add("trace", cmd_trace, "chunked READ/WRITE trace tables")
    p.add_argument("--programs", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--ref")
    p.add_argument("--out", default="-")

    p = add("simulate", cmd_simulate, "run episodes or play back programs")
    p.add_argument("--policy", required=True, help="trained policy bundle")
    p.add_argument("--src", required=True)
    p.add_argument("--programs", help="playback mode: execute these programs")
    p.add_argument("--decoding", choices=["greedy", "sample"], default="greedy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")

    p = add("train", cmd_train, "coupled imitation learning")
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--align", required=True)
    p.add_argument("--dev-src", required=True)
    p.add_argument("--dev-tgt", required=True)
    p.add_argument("--dev-align", required=True)
    p.add_argument("--beta1", type=float, default=0.05)
    p.add_argument("--beta2", type=float, default=0.15)
    p.add_argument("--beta3", type=float, default=0.15)
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--warm-start-k", type=int, default=0)
    p.add_argument("--features", choices=["rich", "bag"], default="rich")
    p.add_argument("--out", required=True, help="policy bundle path")
    p.add_argument("--history", default="-")

    p = add("evaluate", cmd_evaluate, "episode rollout evaluation of a bundle")
    p.add_argument("--policy", required=True)
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--align", required=True)
    p.add_argument("--decoding", choices=["greedy", "sample"], default="greedy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
