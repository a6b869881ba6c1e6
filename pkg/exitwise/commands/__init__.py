from . import brownian, conditional, diffusion, validate

COMMANDS = [conditional, brownian, diffusion, validate]
