"""Sixty-node simulation: local moves only, edges reported at inclusion probability 0.03."""

from _common import parse, replicate

if __name__ == "__main__":
    args, config = parse(__doc__, seeds=1, fve=0.95)
    replicate("sim3", args, config, tau=0.03)
