import logging

from ..errors import EXIT_OK
from ..services.batch import iter_batch
from ..services.diffusion_exit import build_drift_spec, default_kappa, sample_det, sample_gdet, sample_kdet
from ..services.drift_expr import DRIFT_KINDS, resolve_drift
from .common import RunConfig, add_common_arguments, add_interval_arguments, emit_samples

logger = logging.getLogger(__name__)

NAME = "diffusion-exit"
COLUMNS = ["sample_index", "time", "location", "n_tot", "n_it", "capped"]


def register(subparsers):
    parser = subparsers.add_parser(NAME, help="exact exit time and position of dX = mu(X) dt + dW from [a, b]")
    parser.add_argument("--drift", choices=DRIFT_KINDS, default="zero")
    parser.add_argument("--mu0", type=float, default=1.0, help="drift parameter (ou: mu = -mu0 x; expr: name mu0)")
    parser.add_argument("--expr", help="drift expression in x, for --drift expr")
    add_interval_arguments(parser)
    parser.add_argument("--algo", choices=["det", "kdet", "gdet"], default="det")
    parser.add_argument("--kappa", type=float, help="time horizon for kdet/gdet (default 1/rho, or (b-a)^2)")
    parser.add_argument("--tilted", action="store_true",
                        help="allow det with rho > 0; samples the exit law tilted by exp(-rho tau)")
    add_common_arguments(parser)
    parser.set_defaults(handler=handle, subcommand=NAME)


def _sampler(cfg: RunConfig, spec, params, kappa):
    if cfg.algo == "det":
        if spec.rho > 0 and cfg.tilted:
            logger.warning(f"det with rho={spec.rho:.6g}: output follows the exp(-rho tau)-tilted law")

        def run(rng):
            return sample_det(spec, cfg.x, params, rng, tilted=cfg.tilted), 1
    elif cfg.algo == "kdet":
        def run(rng):
            return sample_kdet(spec, cfg.x, kappa, params, rng), 1
    else:
        def run(rng):
            return sample_gdet(spec, cfg.x, params, rng, kappa=kappa)
    return run


def handle(cfg: RunConfig) -> int:
    fns = resolve_drift(cfg.drift or "zero", cfg.mu0, cfg.expr)
    spec = build_drift_spec(fns.mu, fns.mu_prime, cfg.interval(), name=fns.name)
    params = cfg.series_params()
    kappa = cfg.kappa if cfg.kappa is not None else default_kappa(spec)
    draws = iter_batch(_sampler(cfg, spec, params, kappa), cfg.n, cfg.seed, cfg.streams, cfg.threads)
    rows = (
        {"sample_index": i, "time": s.time, "location": s.location, "n_tot": s.n_tot, "n_it": n_it,
         "capped": s.capped}
        for i, (s, n_it) in enumerate(draws)
    )
    extra = {"drift": {"name": spec.name, "rho": spec.rho, "gamma_plus": spec.gamma_plus, "delta": spec.delta,
                       "kappa": kappa if cfg.algo != "det" else None}}
    emit_samples(cfg, COLUMNS, rows, ["time", "n_tot", "n_it"], "time", extra)
    return EXIT_OK
