"""Command-line entry point: gen, train, eval, gradcheck, scores.

Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
Configuration precedence: built-in defaults < config file < flags.
All randomness funnels through --seed; outputs carry no timestamps so
identical invocations produce byte-identical files.
"""

import argparse
import sys

import numpy as np

from . import adapter_io, gradcheck
from .encoders import SyntheticWorld, synthetic_generate
from .errors import FmregError
from .evaluation import evaluate_base_to_novel
from .features import compute_score_matrix, features_from_store, select_unexpected
from .prompts import ClassVocabulary, split_base_novel
from .store import store_read, store_write
from .trainer import TrainConfig, sample_few_shot, train

_GEN_DEFAULTS = {
    "seed": 0, "classes": 10, "templates": 60, "dim": 64, "n_per_class": 20,
    "sigma_template": 0.1, "sigma_image": 0.1, "split": "train",
}
_TRAIN_DEFAULTS = {
    "seed": 0, "gamma": 0.1, "beta": 5, "tau": 0.01, "lr": 0.0025,
    "epochs": 30, "shots": 16, "batch_size": 4, "negatives_per_class": False,
}

_BOOL = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _parse_config_file(path, allowed):
    """Read `key = value` lines; '#' comments; unknown keys rejected."""
    out = {}
    with open(path, encoding="utf-8") as f:
        for raw in f:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"malformed config line: {raw.rstrip()!r}")
            key, val = (part.strip() for part in line.split("=", 1))
            if key not in allowed:
                raise UsageError(f"unknown config key: {key!r}")
            out[key] = val
    return out


def _resolve(defaults, file_vals, flag_vals):
    merged = dict(defaults)
    for key, raw in file_vals.items():
        ref = defaults[key]
        if isinstance(ref, bool):
            merged[key] = _BOOL[raw.lower()]
        else:
            merged[key] = type(ref)(raw)
    for key, val in flag_vals.items():
        if val is not None:
            merged[key] = val
    return merged


def _add_config_flag(p):
    p.add_argument("--config", help="config file with `key = value` lines")


def _fmt(x):
    return f"{x:.17g}"


def _echo_config(cfg, out=sys.stdout):
    for key in sorted(cfg):
        print(f"# {key} = {cfg[key]}", file=out)


def cmd_gen(args):
    file_vals = _parse_config_file(args.config, _GEN_DEFAULTS) if args.config else {}
    flags = {k: getattr(args, k) for k in _GEN_DEFAULTS}
    cfg = _resolve(_GEN_DEFAULTS, file_vals, flags)
    world = SyntheticWorld(seed=cfg["seed"], n_classes=cfg["classes"],
                           n_templates=cfg["templates"], dim=cfg["dim"],
                           n_per_class=cfg["n_per_class"],
                           sigma_template=cfg["sigma_template"],
                           sigma_image=cfg["sigma_image"])
    store = synthetic_generate(world, split=cfg["split"])
    store_write(store, args.out)
    _echo_config(cfg)
    print(f"wrote {args.out}: T={store.n_templates} K={store.n_classes} "
          f"D={store.dim} N={store.n_images}")
    return 0


def cmd_train(args):
    file_vals = _parse_config_file(args.config, _TRAIN_DEFAULTS) if args.config else {}
    flags = {k: getattr(args, k) for k in _TRAIN_DEFAULTS}
    cfg = _resolve(_TRAIN_DEFAULTS, file_vals, flags)
    try:
        tc = TrainConfig(gamma=cfg["gamma"], beta=cfg["beta"], tau=cfg["tau"],
                         lr=cfg["lr"], epochs=cfg["epochs"], shots=cfg["shots"],
                         batch_size=cfg["batch_size"], seed=cfg["seed"],
                         negatives_per_class=cfg["negatives_per_class"])
    except FmregError as e:
        raise UsageError(str(e)) from e
    if tc.beta < 1:
        raise UsageError("beta must be >= 1")
    store = store_read(args.store_in)
    fm = features_from_store(store)
    vocab = split_base_novel(ClassVocabulary(store.class_names), tc.seed)
    trainset, warns = sample_few_shot(store, vocab.base, tc.shots, tc.seed)
    report = train(fm, trainset, tc)
    report.warnings = warns
    _echo_config(cfg)
    with open(args.report_out, "w", encoding="utf-8") as f:
        f.write(report.to_csv())
    json_out = args.report_out + ".json"
    with open(json_out, "w", encoding="utf-8") as f:
        f.write(report.to_json())
    adapter_io.adapter_write(report.final_state, args.adapter_out)
    last = report.epochs[-1]
    print(f"trained {tc.epochs} epochs: total={_fmt(last.total)} "
          f"train_acc={_fmt(last.train_acc)}")
    return 0


def cmd_eval(args):
    store = store_read(args.store_in)
    state = adapter_io.adapter_read(args.adapter_in)
    fm = features_from_store(store)
    base = tuple(state.base_indices)
    novel = tuple(i for i in range(store.n_classes) if i not in set(base))
    base_res, novel_res, hm = evaluate_base_to_novel(state, fm, store, base, novel,
                                                     threads=args.threads)
    row = (f"{args.dataset},{100 * base_res.accuracy:.2f},"
           f"{100 * novel_res.accuracy:.2f},{hm:.2f}\n")
    with open(args.out, "w", encoding="utf-8") as f:
        f.write("dataset,base,novel,hm\n")
        f.write(row)
    print(row, end="")
    return 0


def cmd_gradcheck(args):
    epsilons = [float(e) for e in args.eps.split(",")]
    ok = True
    for eps in epsilons:
        worst = gradcheck.run_gradcheck(n_instances=args.instances, seed=args.seed,
                                        eps=eps, corrupt=args.corrupt)
        for name in ("contrastive", "cross_entropy", "total"):
            err = worst[name]
            print(f"eps={eps:g} {name}: max relative error {err:.3e}")
            ok = ok and err <= args.threshold
    return 0 if ok else 1


def cmd_scores(args):
    store = store_read(args.store_in)
    fm = features_from_store(store)
    if not 0 <= args.sample < store.n_images:
        raise UsageError(f"sample index {args.sample} outside [0, {store.n_images})")
    v = store.unit_images()[args.sample]
    label = int(store.labels[args.sample])
    scores = compute_score_matrix(fm, v)
    sel = select_unexpected(scores, label, args.beta, args.negatives_per_class)
    lines = ["template," + ",".join(f"class_{k}" for k in range(store.n_classes))]
    for p in range(store.n_templates):
        lines.append(f"{p}," + ",".join(_fmt(s) for s in scores[p]))
    lines.append("designated," + ";".join(f"{p}:{k}" for p, k in sel.designated))
    lines.append("non_designated," + ";".join(f"{p}:{k}" for p, k in sel.non_designated))
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        print(text, end="")
    return 0


class UsageError(Exception):
    pass


def build_parser():
    ap = argparse.ArgumentParser(prog="fmreg")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic embedding store")
    _add_config_flag(g)
    g.add_argument("--seed", type=int)
    g.add_argument("--classes", type=int)
    g.add_argument("--templates", type=int)
    g.add_argument("--dim", type=int)
    g.add_argument("--n-per-class", dest="n_per_class", type=int)
    g.add_argument("--sigma-template", dest="sigma_template", type=float)
    g.add_argument("--sigma-image", dest="sigma_image", type=float)
    g.add_argument("--split", choices=["train", "test"])
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train the adapter on a store")
    _add_config_flag(t)
    t.add_argument("--store-in", required=True)
    t.add_argument("--report-out", required=True)
    t.add_argument("--adapter-out", required=True)
    t.add_argument("--seed", type=int)
    t.add_argument("--gamma", type=float)
    t.add_argument("--beta", type=int)
    t.add_argument("--tau", type=float)
    t.add_argument("--lr", type=float)
    t.add_argument("--epochs", type=int)
    t.add_argument("--shots", type=int)
    t.add_argument("--batch-size", dest="batch_size", type=int)
    t.add_argument("--negatives-per-class", dest="negatives_per_class",
                   action="store_const", const=True)
    t.set_defaults(func=cmd_train)

    e = sub.add_parser("eval", help="base-to-novel evaluation")
    e.add_argument("--store-in", required=True)
    e.add_argument("--adapter-in", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--dataset", default="synthetic")
    e.add_argument("--threads", type=int, default=1,
                   help="parallel evaluation with deterministic reduction")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("gradcheck", help="verify analytic gradients")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--instances", type=int, default=100)
    c.add_argument("--eps", default="1e-5", help="comma-separated step sizes")
    c.add_argument("--threshold", type=float, default=1e-5)
    c.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    c.set_defaults(func=cmd_gradcheck)

    s = sub.add_parser("scores", help="dump one sample's score matrix and selection")
    s.add_argument("--store-in", required=True)
    s.add_argument("--sample", type=int, default=0)
    s.add_argument("--beta", type=int, default=5)
    s.add_argument("--negatives-per-class", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_scores)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FmregError as e:
        # validation-style errors are usage problems; runtime errors exit 1
        from .errors import BetaTooLarge, InvalidConfig, InvalidTemperature
        if isinstance(e, (BetaTooLarge, InvalidConfig, InvalidTemperature)):
            print(f"error: {e}", file=sys.stderr)
            return 2
        print(f"failure: {e}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as e:
        print(f"failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
