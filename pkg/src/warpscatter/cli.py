"""Command-line entry point: ``warpscatter <command> --config run.toml``.

Exit codes: 0 success, 1 numerical failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import channels as chmod
from . import geometry, profile as prof
from .config import RunConfig, load_config, output_dir
from .errors import ConfigError, WarpScatterError
from .functions import smooth_bump
from .metric_space import admissibility, dtilde_1, dtilde_inf, radial_pointwise
from .output import header_line, write_columns, write_csv, write_kv, write_svg
from .scatter1d import (EnvelopeSpec, channel_potential, k_grid_spec, openness_of, s_matrix, scatter,
                        square_barrier, zero_potential)
from .stability import PerturbationFamily, report_table, s_matrix_continuity
from .timedomain import asymptotic_masses, evolve, make_state, snapshot_columns, symmetric_grid

COMMANDS = ("profile", "channels", "scatter", "propagate", "distance", "stability")


def build_profile(cfg: RunConfig) -> prof.Profile:
    p = cfg.profile
    if p.kind == "power_law":
        spec = prof.PowerLawSpec(p.beta_minus, p.tau_minus, p.beta_plus, p.tau_plus)
        return prof.build_power_law(spec, p.grid_step, p.n, p.L)
    if p.kind == "cylinder":
        return prof.cylinder(p.tau, p.n, p.L, p.grid_step)
    if p.kind == "horn_euclidean":
        return prof.horn_euclidean(p.tau_plus, p.beta_plus, p.n, p.L, p.grid_step)
    return prof.read_profile_csv(p.path, p.n)


def _header(cfg: RunConfig, command: str, profile: prof.Profile | None = None) -> str:
    context = f"command={command}"
    if profile is not None:
        context += f" n={profile.n} profile={profile.description}"
    return header_line(cfg.constants.header(), context)


def _potential(cfg_section, profile: prof.Profile):
    if cfg_section.potential == "zero":
        return zero_potential(), None
    if cfg_section.potential == "square_barrier":
        return square_barrier(cfg_section.barrier_height, cfg_section.barrier_width), None
    ch = chmod.make_channel(profile, cfg_section.m)
    return channel_potential(ch), ch


def cmd_profile(cfg: RunConfig, out: Path, svg: bool) -> list[Path]:
    p = build_profile(cfg)
    g = cfg.geometry
    grid = np.linspace(g.s_min, g.s_max, g.count)
    grid = grid[(grid >= p.domain[0]) & (grid <= p.domain[1])]
    r, rd, rdd = prof.evaluate(p, grid)
    table = {"s": grid, "r": r, "rdot": rd, "rddot": rdd}
    geo = geometry.geometry_table(p, grid, cfg.constants.constants())
    geo.pop("s")
    table.update(geo)
    head = _header(cfg, "profile", p)
    files = [write_columns(out / "profile.csv", head, table)]
    if svg:
        files.append(write_svg(out / "r0.svg", head, grid, table["r0"], "s", "r0", "r0(s)"))
    return files


def cmd_channels(cfg: RunConfig, out: Path, svg: bool) -> list[Path]:
    p = build_profile(cfg)
    rows = chmod.channel_table(p, cfg.channels.m_max)
    return [write_csv(out / "channels.csv", _header(cfg, "channels", p), chmod.CHANNEL_COLUMNS, rows)]


def cmd_scatter(cfg: RunConfig, out: Path, svg: bool) -> list[Path]:
    sc = cfg.scatter
    p = build_profile(cfg) if sc.potential == "channel" else None
    ks = k_grid_spec(sc.k_min, sc.k_max, sc.k_count, sc.k_spacing)
    if sc.potential == "channel":
        ch = chmod.make_channel(p, sc.m)
        data = s_matrix(ch, ks)
        pot = channel_potential(ch)
    else:
        pot, _ = _potential(sc, p)
        data = scatter(pot, ks)
    head = _header(cfg, "scatter", p) + f" potential={pot.label} match=({pot.left_match:g},{pot.right_match:g})"
    table = {"k": data.k_grid, "re_t": data.t.real, "im_t": data.t.imag, "t_sq": data.transmission,
             "re_r_left": data.r_left.real, "im_r_left": data.r_left.imag, "defect": data.defect}
    files = [write_columns(out / "scatter.csv", head, table)]
    env = EnvelopeSpec(0.0, sc.envelope_halfwidth)
    rows = []
    for v in sc.velocities:
        verdict = openness_of(pot, v, env, cfg.constants.threshold)
        rows.append((v, verdict.indicator, verdict.open))
    files.append(write_csv(out / "openness.csv", head, ("v", "indicator", "open"), rows))
    if svg:
        files.append(write_svg(out / "transmission.svg", head, data.k_grid, data.transmission,
                               "k", "|t|^2", "transmission probability"))
    return files


def cmd_propagate(cfg: RunConfig, out: Path, svg: bool) -> list[Path]:
    pc = cfg.propagate
    p = build_profile(cfg) if pc.potential == "channel" else None
    grid = symmetric_grid(pc.L, pc.step)
    env = EnvelopeSpec(pc.center, pc.envelope_halfwidth)
    if pc.potential == "channel":
        ch = chmod.make_channel(p, pc.m)
        V = ch(grid)
        label = f"w_eff(m={pc.m})"
    else:
        pot, _ = _potential(pc, p)
        V = pot(grid)
        label = pot.label
    packet = make_state(pc.state, pc.v, env, grid)
    k_max = abs(pc.v) + env.support
    dt = pc.dt or min(0.5 / k_max**2, 0.005)
    slow = abs(pc.v) - env.support
    if pc.T:
        T = pc.T
    elif slow > 0:
        T = (abs(pc.center) + pc.split_radius + 40.0) / (2.0 * slow)
    else:
        raise ConfigError("[propagate] T must be given when v <= envelope_halfwidth")
    final = evolve(V, packet, T, dt, wall=pc.wall)
    masses = asymptotic_masses(final, pc.split_radius)
    head = _header(cfg, "propagate", p) + f" potential={label} v={pc.v:g} dt={dt:g} T={T:g}"
    files = [write_kv(out / "masses.txt", head, masses.lines()),
             write_columns(out / "snapshot.csv", head, snapshot_columns(final))]
    if svg:
        files.append(write_svg(out / "density.svg", head, grid, np.abs(final.psi) ** 2, "s",
                               "|psi|^2", f"density at T={T:.4g}"))
    return files


def _family(cfg_section, profile: prof.Profile, eps_grid) -> PerturbationFamily:
    phi = smooth_bump(cfg_section.bump_center, cfg_section.bump_halfwidth, 1.0)
    return PerturbationFamily(profile, phi, cfg_section.mode, tuple(eps_grid))


def cmd_distance(cfg: RunConfig, out: Path, svg: bool) -> list[Path]:
    dc = cfg.distance
    p = build_profile(cfg)
    const = cfg.constants.constants()
    fam = _family(dc, p, (dc.eps,))
    g0, g = fam.g0, fam.member(dc.eps)
    r0 = geometry.r0_function(p, const)
    report = dtilde_1(g0, g, r0)
    report.d_inf = max(report.d_inf, dtilde_inf(g0, g, r0.grid))
    adm = admissibility(g0, g, dc.gamma, dc.ball_eps, r0, const, report=report)
    head = _header(cfg, "distance", p) + f" mode={dc.mode} eps={dc.eps:g}"
    lines = report.lines() + [f"gamma={dc.gamma:g}", f"ball_eps={dc.ball_eps:g}",
                              f"admissible={adm.admissible}", f"bounds_checked={adm.bounds_checked}"]
    lines += [f"reason={r}" for r in adm.reasons]
    files = [write_kv(out / "distance.txt", head, lines)]
    grid = np.linspace(cfg.geometry.s_min, cfg.geometry.s_max, cfg.geometry.count)
    dt, rho = radial_pointwise(g0, g, grid)
    files.append(write_columns(out / "distance.csv", head, {"s": grid, "dtilde": dt, "rho": rho}))
    if svg:
        files.append(write_svg(out / "dtilde.svg", head, grid, dt, "s", "dtilde", "pointwise dtilde"))
    return files


def cmd_stability(cfg: RunConfig, out: Path, svg: bool) -> list[Path]:
    st = cfg.stability
    p = build_profile(cfg)
    fam = _family(st, p, st.eps)
    ks = np.linspace(st.k_min, st.k_max, st.k_count)
    rep = s_matrix_continuity(fam, st.channels, ks, st.v, st.gamma, st.ball_eps,
                              EnvelopeSpec(0.0, st.envelope_halfwidth), cfg.constants.threshold,
                              cfg.constants.constants())
    head = _header(cfg, "stability", p) + f" mode={st.mode} bump=({st.bump_center:g},{st.bump_halfwidth:g})"
    cols, rows = report_table(rep)
    files = [write_csv(out / "stability.csv", head, cols, rows),
             write_kv(out / "stability.txt", head, rep.summary_lines())]
    supported = [m for m in st.channels if m not in rep.unsupported]
    if svg and supported:
        m = supported[0]
        adm = [r for r in rep.rows if r.admissible and r.eps > 0]
        if adm:
            files.append(write_svg(out / "deviation.svg", head, [np.log10(r.eps) for r in adm],
                                   [r.deviation[m] for r in adm], "log10 eps",
                                   f"max |t_eps - t_0| (m={m})", "amplitude deviation"))
    return files


HANDLERS = {
    "profile": cmd_profile,
    "channels": cmd_channels,
    "scatter": cmd_scatter,
    "propagate": cmd_propagate,
    "distance": cmd_distance,
    "stability": cmd_stability,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="warpscatter",
                                     description="Channel scattering on warped-product manifolds.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="PATH", help="TOML run configuration")
    parser.add_argument("--out", metavar="DIR", help="output directory (overrides config and env)")
    parser.add_argument("--svg", action="store_true", help="also write SVG plots")
    return parser


def main(argv=None, environ=None) -> int:
    args = build_parser().parse_args(argv)
    environ = os.environ if environ is None else environ
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        out = output_dir(cfg, args.out, environ)
        out.mkdir(parents=True, exist_ok=True)
        files = HANDLERS[args.command](cfg, out, args.svg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (WarpScatterError, ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for f in files:
        print(f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
