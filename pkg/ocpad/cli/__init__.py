from ocpad.cli import baselines, data, evaluate, experiments, model

# Registration order is the order of the --help listing.
COMMANDS = [data, model, baselines, evaluate, experiments]

__all__ = ['COMMANDS']
