import sys

from ..errors import EXIT_OK, EXIT_VALIDATION_FAILED
from ..services.data_io import write_json
from ..services.validation import SUITES, run_suite
from .common import RunConfig, open_output

NAME = "validate"

DEFAULT_N = {"brownian": 1_000_000, "sin": 100_000, "ou": 10_000}


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="run a statistical validation suite")
    parser.add_argument("--suite", choices=SUITES, required=True)
    parser.add_argument("--n", type=int, help="samples per check (default depends on the suite)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int)
    parser.add_argument("--te", type=float)
    parser.add_argument("--tc", type=float)
    parser.add_argument("--max-terms", dest="max_terms", type=int)
    parser.add_argument("--output", help="JSON report path (default validate_<suite>.json)")
    parser.set_defaults(handler=handle, subcommand=NAME)


def handle(cfg: RunConfig) -> int:
    n = cfg.n if "n" in cfg.model_fields_set else DEFAULT_N[cfg.suite]
    report = run_suite(cfg.suite, n, cfg.seed, cfg.threads, cfg.series_params())

    table = report.to_frame()
    table["pass"] = table["pass"].map({True: "PASS", False: "FAIL"})
    sys.stdout.write(table.to_string(index=False) + "\n")
    sys.stdout.write(f"suite {report.suite}: {'PASS' if report.passed else 'FAIL'}\n")

    with open_output(cfg.output or f"validate_{cfg.suite}.json") as out:
        write_json(report.to_dict(), out)
    return EXIT_OK if report.passed else EXIT_VALIDATION_FAILED
