"""Crank-Nicolson transmitted mass against the spectral openness indicator.

    python scripts/time_vs_frequency.py --v 5 10 --potential bump
"""

import argparse

from warpscatter.channels import make_channel
from warpscatter.functions import smooth_bump
from warpscatter.profile import horn_euclidean
from warpscatter.scatter1d import EnvelopeSpec, channel_potential, compact_potential, openness_of
from warpscatter.timedomain import asymptotic_masses, evolve, make_state, symmetric_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--potential", choices=("channel", "bump"), default="channel")
    ap.add_argument("--amplitude", type=float, default=30.0, help="bump height")
    ap.add_argument("--v", type=float, nargs="+", default=[5.0, 10.0])
    ap.add_argument("--center", type=float, default=-60.0)
    ap.add_argument("--L", type=float, default=400.0)
    ap.add_argument("--step", type=float, default=0.01)
    ap.add_argument("--split", type=float, default=20.0)
    args = ap.parse_args()

    grid = symmetric_grid(args.L, args.step)
    if args.potential == "channel":
        ch = make_channel(horn_euclidean(L=args.L, grid_step=0.01), 0)
        V, pot = ch(grid), channel_potential(ch)
    else:
        bump = smooth_bump(0.0, 1.0, args.amplitude)
        V, pot = bump(grid), compact_potential(bump, (-1.0, 1.0))
    for v in args.v:
        env = EnvelopeSpec(args.center, 1.0)
        dt = min(0.5 / (v + env.support) ** 2, 0.005)
        T = (abs(args.center) + args.split + 40.0) / (2 * (v - env.support))
        out = evolve(V, make_state("plane_mod", v, env, grid), T, dt)
        m = asymptotic_masses(out, args.split)
        ind = openness_of(pot, v, EnvelopeSpec(0.0, 1.0)).indicator
        print(f"v={v:g}: transmitted mass {m.mass_right:.6f}, indicator {ind:.6f}, "
              f"gap {abs(m.mass_right - ind):.2e}, norm drift {m.norm_drift:.1e}")


if __name__ == "__main__":
    main()
