"""Smooth six-node simulation: graph sampler on FPCA scores over replicate datasets."""

from _common import parse, replicate

if __name__ == "__main__":
    args, config = parse(__doc__, seeds=10)
    replicate("sim1", args, config)
