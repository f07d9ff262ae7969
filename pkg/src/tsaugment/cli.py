"""Command-line interface: augment, dtw, dba, eval, ensemble.

Exit codes: 0 success, 2 usage error, 3 invalid input data, 4 I/O error.
"""

import argparse
import json
import logging
import os
import re
import sys
import tempfile

from . import __version__
from .augment import SIZING_RULES, AugmentationPolicy, DBAParams, augment_with_report
from .barycenter import weighted_dba
from .datasets import LabeledDataset, format_dataset, read_dataset
from .evaluation import (ProbabilityMatrix, accuracy, average_posteriors, evaluate,
                         one_hot_posteriors)
from .warping import as_series, dtw_distance, dtw_path

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_IO = 4

SEED_ENV = "TSAUGMENT_SEED"

DELIMITERS = {"tab": "\t", "comma": ",", "auto": None}

# manifest keys that determine an augment run, with their defaults
AUGMENT_DEFAULTS = {
    "k": 5,
    "boosted": 2,
    "seed_weight": 0.5,
    "boosted_weight": 0.15,
    "residual_weight": 0.2,
    "multiplier": 2.0,
    "sizing": "balance",
    "dba_iters": 10,
    "dba_tol": 1e-8,
    "window": None,
    "delimiter": "auto",
    "out_delimiter": "tab",
}


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def atomic_write(path, data):
    """Write bytes to ``path`` via a temporary file in the same directory."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(path, delimiter="auto"):
    try:
        return read_dataset(path, DELIMITERS[delimiter])
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    except ValueError as exc:
        raise CLIError(f"{path}: {exc}", EXIT_DATA) from None


def _default_seed():
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CLIError(f"{SEED_ENV} must be an integer, got {env!r}", EXIT_USAGE) from None


def _fmt(x):
    return format(float(x), ".17g")


def _add_dba_flags(p):
    p.add_argument("--dba-iters", type=int, default=None, help="maximum DBA iterations (10)")
    p.add_argument("--dba-tol", type=float, default=None,
                   help="stop when the relative objective decrease falls below this (1e-8)")
    p.add_argument("--window", type=int, default=None,
                   help="Sakoe-Chiba half-width; unconstrained when omitted")


def build_parser():
    parser = argparse.ArgumentParser(prog="tsaugment", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("augment", help="append weighted-DBA synthetic series to a training set")
    p.add_argument("--train", help="training set (label-first delimited text)")
    p.add_argument("--out", help="augmented dataset path; metadata goes to OUT.json")
    p.add_argument("--manifest", help="replay the run recorded in a metadata sidecar")
    p.add_argument("--seed", type=int, default=None, help=f"master seed (env {SEED_ENV}, else 0)")
    p.add_argument("--k", type=int, default=None, help="nearest neighbors per seed (5)")
    p.add_argument("--boosted", type=int, default=None, help="neighbors given the boosted weight (2)")
    p.add_argument("--seed-weight", type=float, default=None, help="weight of the seed series (0.5)")
    p.add_argument("--boosted-weight", type=float, default=None, help="weight per boosted neighbor (0.15)")
    p.add_argument("--residual-weight", type=float, default=None,
                   help="mass shared by the remaining neighbors (0.2)")
    p.add_argument("--multiplier", type=float, default=None,
                   help="class target as a multiple of the largest class (2)")
    p.add_argument("--sizing", choices=SIZING_RULES, default=None,
                   help="balance: raise every class to the target; generate: add the target to each")
    p.add_argument("--delimiter", choices=sorted(DELIMITERS), default=None, help="input delimiter")
    p.add_argument("--out-delimiter", choices=["tab", "comma"], default=None)
    p.add_argument("--jobs", type=int, default=1, help="worker threads (output is unaffected)")
    _add_dba_flags(p)

    p = sub.add_parser("dtw", help="DTW distance between two series")
    p.add_argument("series", nargs="*",
                   help="two files holding one unlabeled series each (comma or whitespace "
                        "separated), or two inline value lists with --inline")
    p.add_argument("--inline", action="store_true",
                   help="read the positional arguments as comma-separated values")
    p.add_argument("--train", help="dataset to index with -i/-j instead of series files")
    p.add_argument("-i", type=int, help="index of the first series in --train")
    p.add_argument("-j", type=int, help="index of the second series in --train")
    p.add_argument("--path", action="store_true", help="also print the warping path")
    p.add_argument("--delimiter", choices=sorted(DELIMITERS), default="auto")
    p.add_argument("--window", type=int, default=None)

    p = sub.add_parser("dba", help="DBA average of a dataset or one of its classes")
    p.add_argument("--train", required=True)
    p.add_argument("--label", help="restrict to this class")
    p.add_argument("--init-index", type=int, default=0,
                   help="member (within the selection) used as the initial average")
    p.add_argument("--out", help="write the average here instead of standard output")
    p.add_argument("--delimiter", choices=sorted(DELIMITERS), default="auto")
    _add_dba_flags(p)

    p = sub.add_parser("eval", help="1-NN DTW accuracy on a test set, as CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--augmented", help="augmented training set to compare against --train")
    p.add_argument("--posteriors-prefix",
                   help="write one-hot posteriors to PREFIX.<trainset>.csv for the ensemble command")
    p.add_argument("--delimiter", choices=sorted(DELIMITERS), default="auto")
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("ensemble", help="average two posterior files and take the argmax")
    p.add_argument("probs_a")
    p.add_argument("probs_b")
    p.add_argument("--truth", help="labeled dataset whose labels score the predictions")
    p.add_argument("--delimiter", choices=sorted(DELIMITERS), default="auto")
    return parser


def _resolve_augment(args):
    """Merge manifest, flags and defaults into the full run settings."""
    settings = dict(AUGMENT_DEFAULTS)
    settings.update(train=None, out=None, seed=None)
    if args.manifest:
        try:
            with open(args.manifest, encoding="utf-8") as fh:
                recorded = json.load(fh)["manifest"]
        except OSError as exc:
            raise CLIError(f"cannot read {args.manifest}: {exc.strerror or exc}", EXIT_IO) from None
        except (ValueError, KeyError, TypeError):
            raise CLIError(f"{args.manifest}: not a run manifest", EXIT_DATA) from None
        unknown = set(recorded) - set(settings)
        if unknown:
            raise CLIError(f"{args.manifest}: unknown keys {sorted(unknown)}", EXIT_DATA)
        settings.update(recorded)
    for key in list(settings):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if settings["seed"] is None:
        settings["seed"] = _default_seed()
    if not settings["train"] or not settings["out"]:
        raise CLIError("augment needs --train and --out (or a --manifest providing them)", EXIT_USAGE)
    return settings


def cmd_augment(args):
    s = _resolve_augment(args)
    try:
        policy = AugmentationPolicy(
            neighbor_count=s["k"], boosted_count=s["boosted"], seed_weight=s["seed_weight"],
            boosted_weight=s["boosted_weight"], residual_mass=s["residual_weight"],
            multiplier=s["multiplier"], sizing=s["sizing"], master_seed=s["seed"])
        dba_params = DBAParams(s["dba_iters"], s["dba_tol"], s["window"])
        if dba_params.max_iters < 1 or dba_params.rel_tol < 0:
            raise ValueError("--dba-iters must be positive and --dba-tol nonnegative")
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_USAGE) from None

    train = _load(s["train"], s["delimiter"])
    augmented, report = augment_with_report(train, policy, dba_params, n_jobs=args.jobs)

    metadata = {
        "tool": "tsaugment",
        "version": __version__,
        "command": "augment",
        "manifest": s,
        "policy": policy.to_dict(),
        "dba": dba_params.to_dict(),
        "original_counts": train.class_counts(),
        "generated": report.generated,
        "final_counts": augmented.class_counts(),
        "skipped_singleton_classes": report.skipped,
    }
    data = format_dataset(augmented, DELIMITERS[s["out_delimiter"]]).encode("utf-8")
    sidecar = (json.dumps(metadata, indent=2, sort_keys=True) + "\n").encode("utf-8")
    try:
        atomic_write(s["out"], data)
        atomic_write(s["out"] + ".json", sidecar)
    except OSError as exc:
        raise CLIError(f"cannot write {s['out']}: {exc.strerror or exc}", EXIT_IO) from None
    return EXIT_OK


def _read_series_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    return _parse_values(text, path)


def _parse_values(text, where):
    tokens = [t for t in re.split(r"[,\s]+", text) if t]
    try:
        return as_series([float(t) for t in tokens], where)
    except ValueError as exc:
        raise CLIError(f"{where}: {exc}", EXIT_DATA) from None


def cmd_dtw(args):
    if args.train is not None:
        if args.i is None or args.j is None or args.series:
            raise CLIError("with --train give -i and -j and no series arguments", EXIT_USAGE)
        data = _load(args.train, args.delimiter)
        try:
            a, b = data.series[args.i], data.series[args.j]
        except IndexError:
            raise CLIError(f"index out of range for {len(data)} series", EXIT_USAGE) from None
    elif len(args.series) == 2:
        if args.inline:
            a, b = (_parse_values(v, f"series {k + 1}") for k, v in enumerate(args.series))
        else:
            a, b = (_read_series_file(p) for p in args.series)
    else:
        raise CLIError("give two series (files or --inline values) or --train with -i/-j",
                       EXIT_USAGE)
    try:
        if args.path:
            path, cost = dtw_path(a, b, args.window)
            print(_fmt(cost))
            print(" ".join(f"{i}:{j}" for i, j in path))
        else:
            print(_fmt(dtw_distance(a, b, args.window)))
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_USAGE) from None
    return EXIT_OK


def cmd_dba(args):
    data = _load(args.train, args.delimiter)
    if args.label is not None:
        if args.label not in data.class_order:
            raise CLIError(f"unknown class label {args.label!r}", EXIT_DATA)
        members = data.members(args.label)
    else:
        members = data.series
    if not 0 <= args.init_index < len(members):
        raise CLIError(f"--init-index out of range for {len(members)} series", EXIT_USAGE)
    params = DBAParams(args.dba_iters or 10, 1e-8 if args.dba_tol is None else args.dba_tol,
                       args.window)
    avg = weighted_dba(members, [1.0 / len(members)] * len(members), members[args.init_index],
                       params.max_iters, params.rel_tol, params.window)
    label = args.label if args.label is not None else "dba"
    text = format_dataset(LabeledDataset([(label, avg)]), "\t")
    if args.out:
        try:
            atomic_write(args.out, text.encode("utf-8"))
        except OSError as exc:
            raise CLIError(f"cannot write {args.out}: {exc.strerror or exc}", EXIT_IO) from None
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_eval(args):
    test = _load(args.test, args.delimiter)
    sets = [("original", args.train)]
    if args.augmented:
        sets.append(("augmented", args.augmented))
    loaded = [(name, path, _load(path, args.delimiter)) for name, path in sets]
    print("train_set,path,n_train,n_test,accuracy")
    for name, path, train in loaded:
        result = evaluate(train, test, window=args.window, n_jobs=args.jobs)
        print(f"{name},{path},{len(train)},{len(test)},{_fmt(result.accuracy)}")
        if args.posteriors_prefix:
            order = list(dict.fromkeys(train.class_order + test.class_order))
            probs = one_hot_posteriors(result.predictions, order)
            target = f"{args.posteriors_prefix}.{name}.csv"
            try:
                atomic_write(target, probs.to_csv().encode("utf-8"))
            except OSError as exc:
                raise CLIError(f"cannot write {target}: {exc.strerror or exc}", EXIT_IO) from None
    return EXIT_OK


def _load_probs(path):
    try:
        return ProbabilityMatrix.from_csv(path)
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    except ValueError as exc:
        raise CLIError(f"{path}: {exc}", EXIT_DATA) from None


def cmd_ensemble(args):
    a = _load_probs(args.probs_a)
    b = _load_probs(args.probs_b)
    try:
        _, predictions = average_posteriors(a, b)
    except ValueError as exc:
        raise CLIError(str(exc), EXIT_DATA) from None
    truth = None
    if args.truth:
        truth = _load(args.truth, args.delimiter).labels
        if len(truth) != len(predictions):
            raise CLIError(f"{len(truth)} truth labels for {len(predictions)} predictions",
                           EXIT_DATA)
    print("index,prediction" + (",truth" if truth else ""))
    for k, label in enumerate(predictions):
        print(f"{k},{label}" + (f",{truth[k]}" if truth else ""))
    if truth:
        print(f"accuracy,{_fmt(accuracy(predictions, truth))}")
    return EXIT_OK


COMMANDS = {
    "augment": cmd_augment,
    "dtw": cmd_dtw,
    "dba": cmd_dba,
    "eval": cmd_eval,
    "ensemble": cmd_ensemble,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except CLIError as exc:
        print(f"tsaugment {args.command}: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
