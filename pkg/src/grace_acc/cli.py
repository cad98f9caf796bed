"""Command line runner: ``grace-acc <stage> [options]``.

Stages: ingest, preprocess, train, evaluate, forecast, run-all.  Every
config key can be set in the ``--config`` INI file and overridden by the
flag of the same name.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import pipeline
from .config import KEYS, load_config
from .exceptions import GraceAccError, NumericFailure

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
GLOBAL_KEYS = ("seed", "out_dir", "jobs")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _add_key(group, key, suppress: bool):
    kwargs = {"dest": key.name, "metavar": key.name.upper()}
    if suppress:
        kwargs["default"] = argparse.SUPPRESS
    if key.choices:
        kwargs["choices"] = key.choices
    section = f"[{key.section}] {key.name}"
    default = ", ".join(key.default) if isinstance(key.default, tuple) else key.default
    group.add_argument(key.flag, type=key.parse, help=f"{key.help} ({section}, default: {default})",
                       **kwargs)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="INI config file")
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS,
                        help="more logging (repeatable)")
    for key in KEYS:
        _add_key(common, key, suppress=True)

    parser = _Parser(prog="grace-acc", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    for key in KEYS:
        if key.name in GLOBAL_KEYS:
            _add_key(parser, key, suppress=False)
            parser.set_defaults(**{key.name: None})
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    helps = {
        "ingest": "parse ACC1B day files and dump them as CSV",
        "preprocess": "clean, scale, downsample and split each axis",
        "train": "train one LSTM per satellite/axis",
        "evaluate": "RMSE report, CSV tables and SVG plots",
        "forecast": "recursive forecast of a gap after the seed window",
        "run-all": "every stage in order",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def _config_from(args):
    overrides = {k.name: getattr(args, k.name, None) for k in KEYS}
    return load_config(getattr(args, "config", None), **overrides)


def _cmd_ingest(cfg):
    for path in pipeline.run_ingest(cfg):
        print(f"wrote {path}")


def _cmd_preprocess(cfg):
    for s in pipeline.run_preprocess(cfg):
        print(f"{s['tag']}: raw {s['raw_count']}, after outlier removal {s['cleaned_count']}, "
              f"final {s['final_length']} ({' -> '.join(s['order'])}), "
              f"train/test {s['split_index']}/{s['final_length'] - s['split_index']}")


def _cmd_train(cfg):
    for s in pipeline.run_train(cfg):
        print(f"{s['tag']}: {s['epochs']} epochs, loss {s['loss']:.4g}, "
              f"val_loss {s['val_loss']:.4g}")


def _cmd_evaluate(cfg):
    reports = pipeline.run_evaluate(cfg)
    print(f"{'tag':<18} {'size':>6} {'train':>8} {'test':>8} {'persist':>8}  [1e-6 m/s^2]")
    for r in reports:
        s = r.scores_1e6()
        print(f"{r.tag:<18} {r.retained_count:>6} {s['train']:>8.3f} {s['test']:>8.3f} "
              f"{s['persistence']:>8.3f}")


def _cmd_forecast(cfg):
    for tag, result in pipeline.run_forecast(cfg).items():
        print(f"{tag}: forecast {result.steps} steps")


def _cmd_run_all(cfg):
    _cmd_ingest(cfg)
    _cmd_preprocess(cfg)
    _cmd_train(cfg)
    _cmd_evaluate(cfg)
    _cmd_forecast(cfg)


COMMANDS = {
    "ingest": _cmd_ingest,
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "forecast": _cmd_forecast,
    "run-all": _cmd_run_all,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _config_from(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except (ValueError, TypeError) as exc:
        print(f"grace-acc: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"grace-acc: {exc}", file=sys.stderr)
        return EXIT_DATA
    verbose = getattr(args, "verbose", 0) or 0
    logging.basicConfig(level=logging.WARNING - 10 * min(verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](cfg)
    except NumericFailure as exc:
        print(f"grace-acc: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (GraceAccError, OSError) as exc:
        print(f"grace-acc: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
