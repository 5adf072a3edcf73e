"""``profilequal`` command line.

Subcommands: ``score``, ``curves``, ``simulate``, ``validate``.

Exit codes: 0 success, 1 parse/validation failure, 2 no scorable data,
3 invalid parameters.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys
from datetime import date
from pathlib import Path

from . import __version__
from .credit_model import CreditParams
from .curves import FIGURES, curves_command
from .errors import (
    DomainError,
    NoScorableRequestsError,
    ParseError,
    QualityError,
    ValidationError,
)
from .ingest import LogFormat, UnservedPolicy, classify_window, parse_log, write_log, write_rejects
from .profile_model import ContentType, KNOWN_CONTENT_TYPES
from .report import MODELS, QualityReport, build_report
from .simulate import TauDistribution, WorkloadSpec, generate

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_NO_DATA = 2
EXIT_PARAMS = 3

log = logging.getLogger("profilequal")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 by default, which here means "no scorable data"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAMS, f"{self.prog}: error: {message}\n")


def infer_format(path, fmt=None) -> LogFormat:
    if fmt:
        return LogFormat(fmt)
    return LogFormat.DelimitedRows if str(path).lower().endswith((".csv", ".tsv")) \
        else LogFormat.RecordPerLine


def score_command(
    path,
    *,
    model: str = "both",
    penalty_per_day: float = 1.0,
    credit: float = 1.0,
    penalty: float = 1.0,
    policy: UnservedPolicy | str = "horizon:90",
    threshold: float = 0.0,
    fmt: str | LogFormat | None = None,
    include_rejected: bool = False,
    max_rejects: int | None = None,
    rejects_path=None,
) -> QualityReport:
    """Parse, classify and score one log file."""
    if isinstance(policy, str):
        try:
            policy = UnservedPolicy.parse(policy)
        except ValueError as exc:
            raise DomainError(f"bad unserved policy {policy!r}: {exc}") from None
    if penalty_per_day < 0:
        raise DomainError(f"penalty per day must be >= 0, got {penalty_per_day}")
    params = CreditParams(credit, penalty)
    fmt = infer_format(path, fmt)
    with open(path, "rb") as fh:
        window = parse_log(fh, fmt, max_rejects=max_rejects, source_name=str(path))
    if rejects_path is not None:
        with open(rejects_path, "w", encoding="utf-8", newline="") as out:
            write_rejects(window.rejects, out, fmt)
    classified = classify_window(window, policy, include_rejected=include_rejected)
    return build_report(
        classified,
        model=model,
        penalty_per_day=penalty_per_day,
        credit_params=params,
        threshold=threshold,
    )


@contextlib.contextmanager
def _output(path):
    if path is None or str(path) == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _cmd_score(args):
    report = score_command(
        args.input,
        model=args.model,
        penalty_per_day=args.penalty_per_day,
        credit=args.credit,
        penalty=args.penalty,
        policy=args.unserved_policy,
        threshold=args.threshold,
        fmt=args.format,
        include_rejected=args.include_rejected,
        max_rejects=args.max_rejects,
        rejects_path=args.rejects,
    )
    with _output(args.out) as out:
        out.write(report.to_json())
    for alert in report.alerts:
        log.warning("ALERT %s", alert.message)
    return EXIT_OK


def _cmd_curves(args):
    figure = args.figure
    if figure in ("fig1", "fig2"):
        params = dict(tau_max=args.tau_max, tau_step=args.tau_step) if figure == "fig1" \
            else dict(p_max=args.p_max, p_step=args.p_step)
        if args.series:
            params["p_values" if figure == "fig1" else "tau_values"] = args.series
    else:
        params = dict(l_max=args.l_max, c=args.credit, p=args.penalty)
        if args.series:
            params["h_values"] = [int(v) for v in args.series]
    table = curves_command(figure, **params)
    text = table.to_records_text() if args.format == "records" else table.to_rows_text()
    with _output(args.out) as out:
        out.write(text)
    return EXIT_OK


def _parse_weights(text):
    weights = {}
    for item in text.split(","):
        name, _, value = item.partition("=")
        weights[ContentType.parse(name)] = float(value) if value else 1.0
    return weights


def _cmd_simulate(args):
    if args.tau_fixed is not None:
        tau = TauDistribution.fixed(args.tau_fixed)
    else:
        tau = TauDistribution.geometric(args.tau_mean)
    kwargs = dict(
        seed=args.seed,
        n_requests=args.n,
        availability_prob=args.availability_prob,
        late_prob_given_available=args.late_prob,
        tau_distribution=tau,
        unserved_prob=args.unserved_prob,
        start=date.fromisoformat(args.start),
        window_days=args.window_days,
    )
    if args.weights:
        kwargs["content_type_weights"] = _parse_weights(args.weights)
    result = generate(WorkloadSpec(**kwargs))
    fmt = LogFormat(args.format or "records")
    with _output(args.out) as out:
        write_log(result.window.records, out, fmt)
    truth = args.truth
    if truth is None and args.out not in (None, "-"):
        truth = f"{args.out}.truth.json"
    if truth is not None:
        Path(truth).write_text(result.truth_json(), encoding="utf-8")
    return EXIT_OK


def _cmd_validate(args):
    fmt = infer_format(args.input, args.format)
    with open(args.input, "rb") as fh:
        window = parse_log(fh, fmt, source_name=str(args.input))
    for rej in window.rejects:
        for v in rej.violations:
            print(f"{args.input}:{rej.line}: {rej.record.request_id}: {v}")
    if args.rejects is not None:
        with open(args.rejects, "w", encoding="utf-8", newline="") as out:
            write_rejects(window.rejects, out, fmt)
    total = len(window.records) + len(window.rejects)
    print(f"{total} records, {len(window.rejects)} invalid")
    return EXIT_PARSE if window.rejects else EXIT_OK


def build_parser():
    parser = _Parser(prog="profilequal", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fmt_help = "rows (CSV with header) or records (JSON lines)"

    s = sub.add_parser("score", help="score a service-profile log")
    s.add_argument("input")
    s.add_argument("--model", choices=MODELS, default="both")
    s.add_argument("--penalty-per-day", type=float, default=1.0,
                   help="delay model penalty points per day")
    s.add_argument("--credit", type=float, default=1.0, help="credits per on-time request")
    s.add_argument("--penalty", type=float, default=1.0, help="penalty per late request")
    s.add_argument("--unserved-policy", default="horizon:90",
                   help="exclude, late, or horizon:<days> (default horizon:90)")
    s.add_argument("--include-rejected", action="store_true",
                   help="count requests whose user rejected the timeline as unserved")
    s.add_argument("--threshold", type=float, default=0.0,
                   help="alert when the credit score falls below this")
    s.add_argument("--format", choices=("rows", "records"), help=f"input format: {fmt_help}")
    s.add_argument("--max-rejects", type=int, default=None)
    s.add_argument("--rejects", help="write records failing validation here")
    s.add_argument("--out", help="report path (default stdout)")
    s.set_defaults(func=_cmd_score)

    c = sub.add_parser("curves", help="emit curve data for fig1, fig2 or fig3")
    c.add_argument("figure", choices=FIGURES)
    c.add_argument("--series", type=float, nargs="+",
                   help="series values (p for fig1, tau for fig2, H for fig3)")
    c.add_argument("--tau-max", type=float, default=10.0)
    c.add_argument("--tau-step", type=float, default=0.1)
    c.add_argument("--p-max", type=float, default=5.0)
    c.add_argument("--p-step", type=float, default=0.05)
    c.add_argument("--l-max", type=int, default=40)
    c.add_argument("--credit", type=float, default=1.0)
    c.add_argument("--penalty", type=float, default=1.0)
    c.add_argument("--format", choices=("rows", "records"), default="rows")
    c.add_argument("--out")
    c.set_defaults(func=_cmd_curves)

    g = sub.add_parser("simulate", help="generate a synthetic log with ground truth")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--availability-prob", type=float, default=0.8)
    g.add_argument("--late-prob", type=float, default=0.2)
    g.add_argument("--unserved-prob", type=float, default=0.05)
    tau = g.add_mutually_exclusive_group()
    tau.add_argument("--tau-mean", type=float, default=3.0)
    tau.add_argument("--tau-fixed", type=int)
    g.add_argument("--start", default="2024-01-01")
    g.add_argument("--window-days", type=int, default=90)
    g.add_argument("--weights", help="e.g. Ebook=3,Journal=1 (default: uniform over "
                   + ", ".join(KNOWN_CONTENT_TYPES) + ")")
    g.add_argument("--format", choices=("rows", "records"), help=f"output format: {fmt_help}")
    g.add_argument("--out")
    g.add_argument("--truth", help="ground-truth sidecar (default <out>.truth.json)")
    g.set_defaults(func=_cmd_simulate)

    v = sub.add_parser("validate", help="check records against the schema invariants")
    v.add_argument("input")
    v.add_argument("--format", choices=("rows", "records"))
    v.add_argument("--rejects")
    v.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NoScorableRequestsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_DATA
    except (DomainError, QualityError, ValueError) as exc:
        print(f"error: invalid parameters: {exc}", file=sys.stderr)
        return EXIT_PARAMS
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
