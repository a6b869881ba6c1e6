from ..errors import EXIT_OK, UsageError
from ..services.batch import iter_batch
from ..services.conditional_position import sample_conditional
from .common import RunConfig, add_common_arguments, add_interval_arguments, emit_samples

NAME = "conditional"
COLUMNS = ["sample_index", "position", "n_c"]


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="position at time t of Brownian motion killed outside [a, b]")
    add_interval_arguments(parser)
    parser.add_argument("--t", type=float, required=True, help="time horizon t >= 0")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle, subcommand=NAME)


def handle(cfg: RunConfig) -> int:
    if cfg.t is None:
        raise UsageError("conditional needs --t")
    iv = cfg.interval()
    params = cfg.series_params()
    draws = iter_batch(lambda r: sample_conditional(cfg.x, iv, cfg.t, params, r),
                       cfg.n, cfg.seed, cfg.streams, cfg.threads)
    rows = ({"sample_index": i, "position": s.position, "n_c": s.n_c} for i, s in enumerate(draws))
    emit_samples(cfg, COLUMNS, rows, ["position", "n_c"], "position")
    return EXIT_OK
