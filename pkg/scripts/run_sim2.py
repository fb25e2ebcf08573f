"""Noisy six-node simulation: Gibbs sampler with the estimated noise variance."""

from _common import parse, replicate

if __name__ == "__main__":
    args, config = parse(__doc__, seeds=5, mode="noisy")
    replicate("sim2", args, config)
