from ..errors import EXIT_OK
from ..services.batch import iter_batch
from ..services.brownian_exit import sample_exit
from .common import RunConfig, add_common_arguments, add_interval_arguments, emit_samples

NAME = "brownian-exit"
COLUMNS = ["sample_index", "time", "location", "n_as"]


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="exit time and exit side of Brownian motion from [a, b]")
    add_interval_arguments(parser)
    add_common_arguments(parser)
    parser.set_defaults(handler=handle, subcommand=NAME)


def handle(cfg: RunConfig) -> int:
    iv = cfg.interval()
    params = cfg.series_params()
    draws = iter_batch(lambda r: sample_exit(cfg.x, iv, params, r), cfg.n, cfg.seed, cfg.streams, cfg.threads)
    rows = ({"sample_index": i, "time": s.time, "location": s.location, "n_as": s.n_as}
            for i, s in enumerate(draws))
    emit_samples(cfg, COLUMNS, rows, ["time", "n_as"], "time")
    return EXIT_OK
