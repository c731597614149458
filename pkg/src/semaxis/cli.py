"""``semaxis`` command line.

Every subcommand accepts ``--config FILE`` (key=value lines, keys named like
the long flags with dashes or underscores); explicit flags override the file.
The resolved configuration is echoed to stderr as one JSON line.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import axes as axmod
from .comparative import expand_topic, filter_topic_terms, project_topic, rank_axes, write_plot_json
from .corpus import count_tokens, default_stopwords, load_stopwords, preprocess, undersample
from .embeddings import (
    EmbeddingFormatError,
    EmbeddingModel,
    OOVError,
    evaluate_analogies,
    load_analogies,
    load_embeddings,
    save_embeddings,
)
from .evaluation import evaluate, load_gold, pole_sensitivity_sweep
from .lexicon import LabelDistribution, class_mass_normalize, induce_lexicon
from .trainer import FineTuneConfig, TrainConfig, fine_tune, train

log = logging.getLogger("semaxis")

EXIT_USAGE = 2
EXIT_MISSING = 3
EXIT_FORMAT = 4
EXIT_OOV = 5
EXIT_INVALID = 6
EXIT_IO = 7


class CLIError(Exception):
    def __init__(self, kind: str, message: str, code: int):
        super().__init__(message)
        self.kind = kind
        self.code = code


# ---------------------------------------------------------------- helpers


def _model_format(path: str, explicit: str | None) -> str:
    if explicit:
        return explicit
    return "binary" if str(path).endswith(".bin") else "text"


def _load_model(path, fmt=None) -> EmbeddingModel:
    model = load_embeddings(path, _model_format(path, fmt))
    ctx = Path(str(path) + ".ctx.npy")
    if ctx.exists():
        context = np.load(ctx)
        if context.shape == model.matrix.shape:
            model = EmbeddingModel(model.vocab, model.matrix, dict(model.meta), context=context)
    return model


def _save_model(model: EmbeddingModel, path, fmt=None):
    save_embeddings(model, path, _model_format(path, fmt))
    if model.context is not None:
        with open(str(path) + ".ctx.npy", "wb") as fh:
            np.save(fh, np.asarray(model.context, dtype=np.float32))


def _read_lines(path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.rstrip("\n") for ln in fh]


def _read_words(path) -> list[str]:
    return [w for ln in _read_lines(path) for w in ln.split()]


def _emit(text: str, output):
    if output:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_axis(spec: str) -> tuple[list[str], list[str]]:
    """``neg:pos`` with comma-separated words on either side."""
    if spec.count(":") != 1:
        raise CLIError("bad_axis", f"axis must look like neg:pos, got {spec!r}", EXIT_USAGE)
    neg, pos = spec.split(":")
    neg_w = [w for w in neg.split(",") if w]
    pos_w = [w for w in pos.split(",") if w]
    if not neg_w or not pos_w:
        raise CLIError("bad_axis", f"axis must look like neg:pos, got {spec!r}", EXIT_USAGE)
    return pos_w, neg_w


def _axis_spec(value: str) -> str:
    try:
        _parse_axis(value)
    except CLIError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return value


def _resolve_axis(args, model: EmbeddingModel):
    if getattr(args, "catalog", None) and getattr(args, "axis_name", None):
        recs = {r["name"]: r for r in axmod.read_catalog_records(args.catalog)}
        if args.axis_name not in recs:
            raise CLIError("unknown_axis", f"axis {args.axis_name!r} not in catalog", EXIT_INVALID)
        r = recs[args.axis_name]
        return axmod.build_axis(model, r["pos_poles"], r["neg_poles"], r["name"])
    if not args.axis:
        raise CLIError("missing_axis", "give --axis neg:pos or --catalog with --axis-name", EXIT_USAGE)
    pos, neg = _parse_axis(args.axis)
    expand = getattr(args, "expand", 0) or 0
    if expand > 0 and len(pos) == 1 and len(neg) == 1:
        return axmod.expand_axis(model, pos[0], neg[0], expand)
    return axmod.build_axis(model, pos, neg, f"{neg[0]}→{pos[0]}")


def _train_config(args, dim=None) -> TrainConfig:
    extra = {"dim": dim} if dim else {"dim": args.dim, "lr_initial": args.lr, "epochs": args.epochs}
    return TrainConfig(
        window=args.window,
        min_count=args.min_count,
        negatives=args.negatives,
        subsample_t=args.subsample,
        seed=args.seed,
        workers=args.workers,
        **extra,
    )


def _corpus(path) -> list[list[str]]:
    return [ln.split() for ln in _read_lines(path)]


# ---------------------------------------------------------------- commands


def cmd_preprocess(args):
    stop = load_stopwords(args.stopwords) if args.stopwords else default_stopwords()
    docs = _read_lines(args.input)
    if args.undersample is not None:
        docs = undersample(docs, args.undersample, args.seed)
    out = [" ".join(preprocess(d, stop, args.strip_numerals)) for d in docs]
    _emit("".join(line + "\n" for line in out), args.output)


def cmd_train(args):
    cfg = _train_config(args)
    corpus = _corpus(args.corpus)
    model = train(corpus, cfg)
    _save_model(model, args.output, args.model_format)
    if args.log:
        _emit("epoch\tloss\n" + "".join(f"{i + 1}\t{l!r}\n" for i, l in enumerate(model.meta["losses"])), args.log)


def cmd_finetune(args):
    ref = _load_model(args.ref, args.model_format)
    cfg = _train_config(args, dim=ref.dim)
    drift_axis = None
    if args.drift_axis:
        pos, neg = _parse_axis(args.drift_axis)
        drift_axis = axmod.build_axis(ref, pos, neg, args.drift_axis)
    ft = FineTuneConfig(
        alpha=args.alpha,
        beta=args.beta,
        top_k=args.top_k,
        max_epochs=args.max_epochs,
        lr=args.lr,
        drift_axis=drift_axis,
        extend_vocab=not args.no_extend_vocab,
    )
    analogies = load_analogies(args.analogies, lowercase=args.lowercase)
    model, report = fine_tune(ref, _corpus(args.corpus), ft, cfg, analogies)
    _save_model(model, args.output, args.model_format)
    Path(args.report).write_text(report.to_json(), encoding="utf-8")
    if args.log:
        _emit(report.to_tsv(), args.log)
    if args.box_table:
        _emit(report.box_table(), args.box_table)
    print(json.dumps({"stop_epoch": report.stop_epoch, "stop_reason": report.stop_reason}))


def cmd_axes_build(args):
    model = _load_model(args.model, args.model_format)
    pairs = axmod.ingest_antonyms(args.antonyms, args.synonyms)
    english = axmod.load_lexicon_words(args.english) if args.english else None
    labelled = axmod.filter_pairs(pairs, model, english, args.threshold, mode=args.redundancy)
    expand_model = _load_model(args.expand_model, args.model_format) if args.expand_model else None
    catalog = axmod.build_catalog(labelled, model, args.expand, expand_model)
    axmod.save_catalog(catalog, args.output)
    if args.report:
        axmod.write_pair_report(labelled, args.report)
    summary = axmod.drop_summary(labelled)
    summary["axes"] = len(catalog)
    if catalog.diversity:
        summary["mean_abs_cos"], summary["std_cos"] = catalog.diversity
    print(json.dumps(summary))


def cmd_score(args):
    model = _load_model(args.model, args.model_format)
    axis = _resolve_axis(args, model)
    words = "all" if args.words in (None, "all") else _read_words(args.words)
    lex = induce_lexicon(model, axis, words)
    if args.labels:
        parts = [float(x) for x in args.labels.split(",")]
        if len(parts) != 3:
            raise CLIError("bad_labels", "--labels needs p_pos,p_neu,p_neg", EXIT_USAGE)
        lex = class_mass_normalize(lex, LabelDistribution(*parts))
    if lex.oov:
        log.warning("%d requested words out of vocabulary", len(lex.oov))
    _emit(lex.to_json() + "\n" if args.json else lex.to_tsv(), args.output)


def cmd_eval(args):
    model = _load_model(args.model, args.model_format)
    axis = _resolve_axis(args, model)
    gold = load_gold(*args.gold)
    words = [t for t in gold.tokens if t in model]
    if not words:
        raise CLIError("no_coverage", "no gold token is in the model vocabulary", EXIT_INVALID)
    report = evaluate(induce_lexicon(model, axis, sorted(words)), gold)
    _emit(report.to_json() + "\n" if args.json else report.to_table(), args.output)


def cmd_sweep(args):
    model = _load_model(args.model, args.model_format)
    pos = args.pos.split(",") if args.pos else list(axmod.STANDARD_POLES[0])
    neg = args.neg.split(",") if args.neg else list(axmod.STANDARD_POLES[1])
    result = pole_sensitivity_sweep(model, pos, neg, args.l, load_gold(*args.gold))
    _emit(result.to_tsv(), args.output)


def cmd_compare_topic(args):
    a = _load_model(args.model_a, args.model_format)
    b = _load_model(args.model_b, args.model_format)
    exp = expand_topic(a, args.seed_word, args.count, mode=args.expansion)
    terms = exp.terms
    if args.counts_a and args.counts_b:
        ca = count_tokens(_read_lines(args.counts_a)).frequencies
        cb = count_tokens(_read_lines(args.counts_b)).frequencies
        terms = filter_topic_terms(exp, ca, cb, args.min_freq)
    if args.catalog and args.axis_name:
        catalog = axmod.load_catalog(args.catalog, a)
        proj = project_topic(a, b, terms, args.axis_name, catalog)
    else:
        proj = project_topic(a, b, terms, _resolve_axis(args, a))
    _emit(proj.to_tsv(), args.output)
    if args.plot:
        write_plot_json(proj.plot_spec(), args.plot)


def cmd_compare_axes(args):
    a = _load_model(args.model_a, args.model_format)
    b = _load_model(args.model_b, args.model_format)
    recs = axmod.read_catalog_records(args.catalog)
    catalog = axmod.AxisCatalog()
    for r in recs:
        try:
            catalog.add(axmod.build_axis(a, r["pos_poles"], r["neg_poles"], r["name"]))
        except (OOVError, ValueError):
            log.warning("axis %s unusable in model A", r["name"])
    ranking = rank_axes(a, b, args.word, catalog, args.k, args.mode)
    if ranking.no_contrast:
        log.warning("no contrast: every diff is zero")
    _emit(ranking.to_tsv(), args.output)
    if args.plot:
        write_plot_json(ranking.plot_spec(), args.plot)


def cmd_analogy(args):
    model = _load_model(args.model, args.model_format)
    report = evaluate_analogies(model, load_analogies(args.analogies, lowercase=args.lowercase))
    _emit(json.dumps(report.to_dict(), indent=2) + "\n", args.output)


# ---------------------------------------------------------------- parser


def _add_train_flags(p, schedule=True):
    if schedule:
        p.add_argument("--dim", type=int, default=300)
        p.add_argument("--lr", type=float, default=0.025)
        p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--min-count", type=int, default=10)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--subsample", type=float, default=1e-3)
    p.add_argument("--workers", type=int, default=1)


def _add_axis_flags(p):
    p.add_argument("--axis", type=_axis_spec, help="inline axis 'neg:pos' (comma-separate several pole words)")
    p.add_argument("--catalog", help="JSON-lines axis catalog")
    p.add_argument("--axis-name", help="axis name inside --catalog")
    p.add_argument("--expand", type=int, default=0, help="grow single-word poles by this many neighbours")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semaxis", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(func=func)
        p.add_argument("--config", help="key=value file; flags take precedence")
        p.add_argument("--seed", type=int, default=None, help="random seed (fallback: $SEMAXIS_SEED, then 1)")
        p.add_argument("--model-format", choices=("text", "binary"), help="default: by extension (.bin = binary)")
        p.add_argument("--output", "-o")
        return p

    p = command("preprocess", cmd_preprocess, "clean a raw corpus, one document per line")
    p.add_argument("--input", required=True)
    p.add_argument("--stopwords")
    p.add_argument("--strip-numerals", action="store_true")
    p.add_argument("--undersample", type=int)

    p = command("train", cmd_train, "train CBOW vectors")
    p.add_argument("--corpus", required=True)
    p.add_argument("--log", help="per-epoch loss TSV")
    _add_train_flags(p)

    p = command("finetune", cmd_finetune, "adapt a reference model to a target corpus")
    p.add_argument("--ref", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--analogies", required=True)
    p.add_argument("--lowercase", action="store_true", help="lowercase analogy questions")
    p.add_argument("--alpha", type=float, default=0.3)
    p.add_argument("--beta", type=float, default=0.001)
    p.add_argument("--top-k", type=int, default=1000)
    p.add_argument("--max-epochs", type=int, default=100)
    p.add_argument("--lr", type=float, default=0.005, help="fixed fine-tuning learning rate")
    p.add_argument("--drift-axis", type=_axis_spec, help="'neg:pos' (default: built-in sentiment poles)")
    p.add_argument("--no-extend-vocab", action="store_true")
    p.add_argument("--report", default="finetune_report.json")
    p.add_argument("--log", help="per-epoch TSV (epoch, loss, acc, delta)")
    p.add_argument("--box-table", help="per-word score changes per epoch (TSV)")
    _add_train_flags(p, schedule=False)

    p = command("axes-build", cmd_axes_build, "filter antonym pairs into an axis catalog")
    p.add_argument("--model", required=True)
    p.add_argument("--antonyms", required=True)
    p.add_argument("--synonyms")
    p.add_argument("--english")
    p.add_argument("--threshold", type=float, default=0.4)
    p.add_argument("--redundancy", choices=("axis", "pole_word"), default="axis")
    p.add_argument("--expand", type=int, default=0)
    p.add_argument("--expand-model", help="model used for pole expansion (default: --model)")
    p.add_argument("--report", help="per-pair status TSV")

    p = command("score", cmd_score, "project words onto an axis")
    p.add_argument("--model", required=True)
    _add_axis_flags(p)
    p.add_argument("--words", help="file of words, or 'all'")
    p.add_argument("--labels", help="p_pos,p_neu,p_neg for class-mass labelling")
    p.add_argument("--json", action="store_true")

    p = command("eval", cmd_eval, "evaluate an axis against gold lexicons")
    p.add_argument("--model", required=True)
    _add_axis_flags(p)
    p.add_argument("--gold", required=True, action="append")
    p.add_argument("--json", action="store_true")

    p = command("sweep", cmd_sweep, "pole-word sensitivity sweep")
    p.add_argument("--model", required=True)
    p.add_argument("--pos")
    p.add_argument("--neg")
    p.add_argument("--l", type=int, default=10)
    p.add_argument("--gold", required=True, action="append")

    p = command("compare-topic", cmd_compare_topic, "topic terms projected in two models")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--seed-word", required=True)
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--expansion", choices=("centroid", "pair"), default="centroid")
    p.add_argument("--counts-a", help="preprocessed corpus A, for the frequency filter")
    p.add_argument("--counts-b")
    p.add_argument("--min-freq", type=int, default=100)
    _add_axis_flags(p)
    p.add_argument("--plot", help="write a scatter plot spec (JSON)")

    p = command("compare-axes", cmd_compare_axes, "rank catalog axes for one word across two models")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--word", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--mode", choices=("abs", "positive", "negative", "single"), default="abs")
    p.add_argument("--plot", help="write a bar plot spec (JSON)")

    p = command("analogy", cmd_analogy, "analogy test accuracy")
    p.add_argument("--model", required=True)
    p.add_argument("--analogies", required=True)
    p.add_argument("--lowercase", action="store_true")
    return parser


def _read_config(path) -> dict[str, str]:
    cfg = {}
    for lineno, line in enumerate(_read_lines(path), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise CLIError("bad_config", f"{path}:{lineno}: expected key=value", EXIT_USAGE)
        k, v = (s.strip() for s in line.split("=", 1))
        cfg[k.replace("-", "_")] = v
    return cfg


def _apply_config(parser, argv) -> None:
    """Install config-file values as subcommand defaults, so flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in choices), None)
    if command is None:
        return
    subparser = choices[command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in _read_config(known.config).items():
        if key not in actions or key in ("config", "help"):
            raise CLIError("bad_config", f"unknown config key {key!r} for {command}", EXIT_USAGE)
        act = actions[key]
        if act.nargs == 0:
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
        elif isinstance(act, argparse._AppendAction):
            defaults[key] = [v.strip() for v in raw.split(",")]
        else:
            try:
                defaults[key] = act.type(raw) if act.type else raw
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise CLIError("bad_config", f"config key {key!r}: {exc}", EXIT_USAGE) from None
        act.required = False
    subparser.set_defaults(**defaults)


def run(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except CLIError as exc:
        return _fail(exc.kind, str(exc), exc.code)
    except FileNotFoundError as exc:
        return _fail("missing_input", str(exc), EXIT_MISSING)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.seed is None:
            env = os.environ.get("SEMAXIS_SEED")
            args.seed = int(env) if env else 1
        resolved = {k: v for k, v in vars(args).items() if k != "func"}
        print("config: " + json.dumps(resolved, sort_keys=True), file=sys.stderr)
        args.func(args)
    except CLIError as exc:
        return _fail(exc.kind, str(exc), exc.code)
    except FileNotFoundError as exc:
        return _fail("missing_input", str(exc), EXIT_MISSING)
    except EmbeddingFormatError as exc:
        return _fail("bad_format", str(exc), EXIT_FORMAT)
    except OOVError as exc:
        return _fail("oov", str(exc), EXIT_OOV)
    except (ValueError, KeyError) as exc:
        return _fail("invalid", str(exc), EXIT_INVALID)
    except OSError as exc:
        return _fail("io", str(exc), EXIT_IO)
    return 0


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"error": kind, "message": message}), file=sys.stderr)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
