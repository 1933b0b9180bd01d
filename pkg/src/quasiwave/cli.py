"""Command line: ``quasiwave run|sweep|check|validate <config>``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .diagnostics import Outcome
from .errors import ParseError, QuasiwaveError, ValidationError
from .harness import (_sanitize, check, cross_validate, load_scenario, run_all, sweep,
                      write_report, write_sweep)

EXIT_OK, EXIT_MISMATCH, EXIT_INCONCLUSIVE, EXIT_CONFIG = 0, 2, 3, 4
EXPECT = {"global": Outcome.GLOBAL_WINDOW, "degenerate": Outcome.DEGENERATE,
          "gradient": Outcome.GRADIENT_BLOWUP}


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_axis(spec: str) -> tuple[str, list]:
    name, sep, values = spec.partition("=")
    if not sep or not name or not values:
        raise ValidationError("--axis", f"expected name=v1,v2,..., got {spec!r}")
    return name.strip(), [_parse_value(v.strip()) for v in values.split(",") if v.strip()]


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quasiwave", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one or both solvers and write reports")
    r.add_argument("config")
    r.add_argument("--solver", choices=("riemann", "flux", "both"))
    r.add_argument("--expect", choices=tuple(EXPECT))
    r.add_argument("--out")

    s = sub.add_parser("sweep", help="run a parameter sweep")
    s.add_argument("config")
    s.add_argument("--axis", action="append", default=[], help="dotted.name=v1,v2,...")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")

    c = sub.add_parser("check", help="report hypotheses and bounds only")
    c.add_argument("config")

    v = sub.add_parser("validate", help="cross-validate the two solvers")
    v.add_argument("config")
    return p


def _exit_for(outcome: Outcome, expect: str | None) -> int:
    if outcome is Outcome.INCONCLUSIVE:
        return EXIT_INCONCLUSIVE
    if expect is not None and EXPECT[expect] is not outcome:
        return EXIT_MISMATCH
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("QUASIWAVE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    try:
        cfg = load_scenario(args.config)
        if args.command == "check":
            print(json.dumps(_sanitize(check(cfg)), indent=2))
            return EXIT_OK
        if args.command == "validate":
            d = cross_validate(cfg)
            print(json.dumps(_sanitize(d.to_dict()), indent=2))
            if "INCONCLUSIVE" in d.outcomes.values():
                return EXIT_INCONCLUSIVE
            return EXIT_OK if d.agree else EXIT_MISMATCH
        out = Path(args.out or cfg.output["dir"])
        if args.command == "sweep":
            axes = dict(parse_axis(a) for a in args.axis)
            rows = sweep(cfg, axes, jobs=args.jobs)
            path = write_sweep(rows, out / f"{cfg.output['stem']}-sweep.csv")
            for row in rows:
                print(json.dumps(_sanitize({"params": row["params"], "outcome": row["outcome"],
                                            "t_stop": row["t_stop"]})))
            print(f"wrote {path}")
            return EXIT_OK
        reports = run_all(cfg, args.solver)
        code = EXIT_OK
        for name, rep in reports.items():
            meta, series = write_report(rep, out, cfg.output["stem"])
            c = rep.classification
            print(f"{name}: {c.outcome.value} t_stop={c.t_stop} {c.reason}".rstrip())
            print(f"  wrote {meta} and {series}")
            code = max(code, _exit_for(c.outcome, args.expect))
        return code
    except (ParseError, ValidationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except QuasiwaveError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
