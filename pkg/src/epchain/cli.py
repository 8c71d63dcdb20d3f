"""Command-line surface.

Subcommands: spectrum, phase-diagram, evolve, boundary, reproduce.  Output
is CSV or JSON (plus optional static SVG plots); identical invocations
produce byte-identical files.  Exit codes: 0 success, 2 configuration
error, 3 numeric failure, 4 validation mismatch between the exact and
numeric phase boundaries.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import analysis, bethe, dynamics, linalg, models, serialize
from .errors import ConfigError, EpchainError, ValidationMismatch

BOUNDARY_REL_TOL = 1e-3


def _parse_axis(text: str, flag: str) -> tuple[float, float, str, int]:
    parts = text.split(":")
    if len(parts) != 4 or parts[2] not in ("log", "lin"):
        raise ConfigError(f"{flag} must look like min:max:{{log|lin}}:count, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[3])
    except ValueError as exc:
        raise ConfigError(f"{flag}: {exc}") from exc
    if count < 1:
        raise ConfigError(f"{flag}: count must be >= 1")
    return lo, hi, parts[2], count


def _model_spec(args, full_space: bool = False) -> models.ModelSpec:
    if args.model == "xy":
        kind = models.ModelKind.XY_FULL_SPACE if full_space else models.ModelKind.XY_MAGNON
    elif args.model == "ising":
        kind = models.ModelKind.TRANSVERSE_ISING
    else:
        raise ConfigError(f"--model must be xy or ising, got {args.model!r}")
    boundary = models.IsingBoundary(getattr(args, "boundary", "periodic"))
    try:
        return models.ModelSpec(
            kind=kind,
            N=args.n,
            V=getattr(args, "v", 0.0),
            gamma=getattr(args, "gamma", 0.0),
            J=getattr(args, "j", 1.0),
            Delta=getattr(args, "delta", 0.0),
            ising_boundary=boundary,
        )
    except (ValueError, EpchainError) as exc:
        flag = _offending_flag(str(exc))
        raise ConfigError(f"{flag}: {exc}") from exc


def _offending_flag(message: str) -> str:
    for name, flag in (("gamma", "--gamma"), ("N ", "--n"), ("V", "--v"),
                       ("J", "--j"), ("Delta", "--delta"), ("2^", "--n")):
        if name in message:
            return flag
    return "--model"


def _parse_init(text: str, spec: models.ModelSpec) -> models.StateVector:
    if text.startswith("site:"):
        site = int(text[5:])
        if not 1 <= site <= spec.N:
            raise ConfigError(f"--init site index must be in 1..{spec.N}")
        if spec.kind is models.ModelKind.XY_MAGNON:
            return models.site_state(spec.N, site)
        return models.single_flip_state(spec.N, site)
    if text.startswith("bits:"):
        bits = text[5:]
        if len(bits) != spec.N or any(b not in "01" for b in bits):
            raise ConfigError(f"--init bits must be {spec.N} characters of 0/1")
        if spec.kind is models.ModelKind.XY_MAGNON:
            raise ConfigError("--init bits requires a full-space model")
        return models.bitstring_state(bits)
    raise ConfigError(f"--init must be site:<k> or bits:<string>, got {text!r}")


def _write(path: str, text: str) -> None:
    serialize.atomic_write(path, text)


def _maybe_plot(enabled: bool, render, out_path: str) -> None:
    if not enabled:
        return
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise ConfigError(f"--plot requires matplotlib: {exc}") from exc
    fig = render(plt)
    fig.savefig(out_path, format="svg")
    plt.close(fig)


# ---------------------------------------------------------------------------
# subcommands

def cmd_spectrum(args) -> int:
    spec = _model_spec(args, full_space=getattr(args, "full_space", False))
    h = models.build_hamiltonian(spec)
    spectrum = linalg.eig(h, want_left=args.vectors)
    if args.format == "json":
        payload = {
            "type": "spectrum",
            "spec": serialize.spec_to_dict(spec),
            "eigenvalues": [[float(e.real), float(e.imag)]
                            for e in spectrum.eigenvalues],
            "max_residual": spectrum.max_residual(),
        }
        _write(args.out, json.dumps(payload, indent=2))
    else:
        lines = ["re,im,residual"]
        for e, r in zip(spectrum.eigenvalues, spectrum.residuals):
            lines.append(f"{serialize.fmt(e.real)},{serialize.fmt(e.imag)},"
                         f"{serialize.fmt(r)}")
        _write(args.out, "\n".join(lines) + "\n")
    if args.vectors:
        lines = ["eigenvalue_index,component_index,re,im"]
        for n in range(spectrum.dim):
            for i, a in enumerate(spectrum.right_vectors[:, n]):
                lines.append(f"{n},{i},{serialize.fmt(a.real)},{serialize.fmt(a.imag)}")
        _write(args.out + ".vectors.csv", "\n".join(lines) + "\n")
    return 0


def cmd_phase_diagram(args) -> int:
    spec = _model_spec(args)
    x_name = "Delta" if args.model == "ising" else "V"
    xlo, xhi, xscale, xcount = _parse_axis(args.x_range, "--x-range")
    glo, ghi, gscale, gcount = _parse_axis(args.gamma_range, "--gamma-range")
    x_axis = analysis.AxisSpec.from_range(x_name, xlo, xhi, xscale, xcount)
    y_axis = analysis.AxisSpec.from_range("gamma", glo, ghi, gscale, gcount)
    grid = analysis.sweep_grid(spec, x_axis, y_axis)
    if args.format == "json":
        _write(args.out, serialize.grid_to_json(grid))
    else:
        _write(args.out, serialize.grid_to_csv(grid))

    def render(plt):
        fig, ax = plt.subplots()
        x, y = np.meshgrid(grid.x_axis.values, grid.y_axis.values, indexing="ij")
        pcm = ax.pcolormesh(x, y, grid.values, shading="nearest", cmap="inferno")
        if grid.x_axis.scale == "log":
            ax.set_xscale("log")
        if grid.y_axis.scale == "log":
            ax.set_yscale("log")
        ax.set_xlabel(x_name)
        ax.set_ylabel("gamma")
        fig.colorbar(pcm, ax=ax, label="max |Im eps|")
        return fig

    _maybe_plot(args.plot, render, os.path.splitext(args.out)[0] + ".svg")
    failures = int(np.sum(np.isnan(grid.values)))
    if failures:
        print(f"warning: {failures} grid nodes failed (NaN)", file=sys.stderr)
        return 3
    return 0


def cmd_evolve(args) -> int:
    spec = _model_spec(args, full_space=False)
    if args.target == "ghz" and args.model != "ising":
        raise ConfigError("--target ghz requires --model ising")
    if args.target in ("w", "bell") and args.model != "xy":
        raise ConfigError(f"--target {args.target} requires --model xy")
    target = models.target_state(args.target, spec.N)
    init = (_parse_init(args.init, spec) if args.init
            else dynamics.default_initial_state(spec))
    if args.t_max <= 0:
        raise ConfigError("--t-max must be positive")
    if args.steps < 2:
        raise ConfigError("--steps must be >= 2")
    trace = dynamics.evolve_trace(spec, init, target, args.t_max, args.steps,
                                  target_name=args.target)
    if args.format == "json":
        _write(args.out, serialize.trace_to_json(trace))
    else:
        _write(args.out, serialize.trace_to_csv(trace))
    t_conv = dynamics.convergence_time(trace, tol=args.tol)
    try:
        f_dom = dynamics.steady_fidelity(spec, target)
        dom_text = serialize.fmt(f_dom)
    except EpchainError:
        dom_text = "nan"
    print(f"convergence_time={serialize.fmt(t_conv) if math.isfinite(t_conv) else 'inf'} "
          f"dominant_fidelity={dom_text}")

    def render(plt):
        fig, ax = plt.subplots()
        ax.plot(trace.times, trace.fidelities)
        ax.set_xlabel("t")
        ax.set_ylabel("fidelity")
        ax.set_ylim(0, 1.02)
        return fig

    _maybe_plot(args.plot, render, os.path.splitext(args.out)[0] + ".svg")
    return 0


def cmd_boundary(args) -> int:
    spec = _model_spec(args)
    xlo, xhi, xscale, xcount = _parse_axis(args.x_range, "--x-range")
    axis = analysis.AxisSpec.from_range("V" if args.model == "xy" else "Delta",
                                        xlo, xhi, xscale, xcount)
    rows = []
    any_mismatch = False
    for control in axis.values:
        numeric = analysis.numeric_boundary_gamma(spec, float(control))
        exact = pert = gap = None
        mismatch = False
        if args.model == "xy" and abs(control) > 2:
            exact = bethe.exact_boundary_gamma(spec.N, float(control))
            gap = abs(exact - numeric) / numeric
            mismatch = gap > BOUNDARY_REL_TOL
            if spec.N >= 6 and spec.N % 2 == 0:
                pert = bethe.perturbative_boundary(spec.N, float(control))
        rows.append((float(control), exact, pert, numeric, gap, mismatch))
        any_mismatch = any_mismatch or mismatch
    _write(args.out, serialize.boundary_table_csv(rows))
    if any_mismatch:
        print("validation mismatch: exact boundary disagrees with numeric scan; "
              "the numeric value is authoritative", file=sys.stderr)
        return 4
    return 0


# ---------------------------------------------------------------------------
# figure reproduction

def _reproduce_fig1(out_dir: str, plot: bool) -> dict:
    params = {"N": [6, 8], "gammas": [1.05, 1.1, 1.2, 1.5],
              "t_max": 200.0, "steps": 2000, "target": "w", "init": "site:1"}
    curves = {}
    for n in params["N"]:
        target = models.target_state("w", n)
        for g in params["gammas"]:
            spec = models.ModelSpec(models.ModelKind.XY_MAGNON, N=n, gamma=g)
            trace = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec),
                                          target, params["t_max"], params["steps"],
                                          target_name="w")
            path = os.path.join(out_dir, f"fig1_w_N{n}_gamma{g}.csv")
            _write(path, serialize.trace_to_csv(trace))
            curves[(n, g)] = trace

    def render(plt):
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
        for ax, n in zip(axes, params["N"]):
            for g in params["gammas"]:
                tr = curves[(n, g)]
                ax.plot(tr.times, tr.fidelities, label=f"gamma={g}")
            ax.set_title(f"N={n}")
            ax.set_xlabel("t")
            ax.set_ylabel("f(t)")
            ax.legend(fontsize=7)
        fig.tight_layout()
        return fig

    _maybe_plot(plot, render, os.path.join(out_dir, "fig1.svg"))
    return params


def _reproduce_fig2(out_dir: str, plot: bool) -> dict:
    params = {"N": [6, 8, 10], "V_range": [2.0, 100.0, "log", 40],
              "gamma_range": [1e-8, 1.0, "log", 40],
              "exact_overlay_V": [3, 5, 10, 20, 40, 70, 100]}
    grids = {}
    for n in params["N"]:
        spec = models.ModelSpec(models.ModelKind.XY_MAGNON, N=n)
        grid = analysis.sweep_grid(
            spec,
            analysis.AxisSpec.from_range("V", *params["V_range"][:2], "log",
                                         params["V_range"][3]),
            analysis.AxisSpec.from_range("gamma", *params["gamma_range"][:2],
                                         "log", params["gamma_range"][3]),
        )
        _write(os.path.join(out_dir, f"fig2_grid_N{n}.csv"),
               serialize.grid_to_csv(grid))
        overlay = [(v, bethe.exact_boundary_gamma(n, v))
                   for v in params["exact_overlay_V"]]
        lines = ["v,gamma_c_exact"]
        lines += [f"{serialize.fmt(v)},{serialize.fmt(g)}" for v, g in overlay]
        _write(os.path.join(out_dir, f"fig2_exact_boundary_N{n}.csv"),
               "\n".join(lines) + "\n")
        grids[n] = (grid, overlay)

    def render(plt):
        fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
        for ax, n in zip(axes, params["N"]):
            grid, overlay = grids[n]
            x, y = np.meshgrid(grid.x_axis.values, grid.y_axis.values,
                               indexing="ij")
            ax.pcolormesh(x, y, grid.values, shading="nearest", cmap="inferno")
            vs = [v for v, _ in overlay]
            gs = [g for _, g in overlay]
            ax.plot(vs, gs, "w--", lw=1)
            ax.set_xscale("log")
            ax.set_yscale("log")
            ax.set_title(f"N={n}")
            ax.set_xlabel("V")
            ax.set_ylabel("gamma")
        fig.tight_layout()
        return fig

    _maybe_plot(plot, render, os.path.join(out_dir, "fig2.svg"))
    return params


def _reproduce_fig3(out_dir: str, plot: bool) -> dict:
    runs = [(6, 5.0, 2e4), (6, 10.0, 2e5), (8, 5.0, 2e6)]
    params = {"runs": [{"N": n, "V": v, "t_max": t} for n, v, t in runs],
              "steps": 2000, "target": "bell", "gamma": "optimized"}
    curves = []
    for n, v, t_max in runs:
        template = models.ModelSpec(models.ModelKind.XY_MAGNON, N=n, V=v)
        target = models.target_state("bell", n)
        g_star, _ = analysis.optimize_gamma(template, target, t_max)
        spec = models.ModelSpec(models.ModelKind.XY_MAGNON, N=n, V=v, gamma=g_star)
        trace = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec),
                                      target, t_max, params["steps"],
                                      target_name="bell")
        _write(os.path.join(out_dir, f"fig3_bell_N{n}_V{v}.csv"),
               serialize.trace_to_csv(trace))
        curves.append((n, v, g_star, trace))
    params["optimized_gammas"] = {f"N{n}_V{v}": g for n, v, g, _ in curves}

    def render(plt):
        fig, ax = plt.subplots()
        for n, v, g, tr in curves:
            ax.plot(tr.times, tr.fidelities, label=f"N={n}, V={v}")
        ax.set_xscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("f(t)")
        ax.legend()
        return fig

    _maybe_plot(plot, render, os.path.join(out_dir, "fig3.svg"))
    return params


def _reproduce_fig4(out_dir: str, plot: bool) -> dict:
    params = {"N": [6, 8], "J": 1.0, "Delta_range": [0.2, 2.0, "lin", 25],
              "gamma_range": [1e-4, 1.0, "log", 25]}
    grids = {}
    for n in params["N"]:
        spec = models.ModelSpec(models.ModelKind.TRANSVERSE_ISING, N=n, J=1.0)
        grid = analysis.sweep_grid(
            spec,
            analysis.AxisSpec.from_range("Delta", 0.2, 2.0, "lin", 25),
            analysis.AxisSpec.from_range("gamma", 1e-4, 1.0, "log", 25),
        )
        _write(os.path.join(out_dir, f"fig4_grid_N{n}.csv"),
               serialize.grid_to_csv(grid))
        grids[n] = grid

    def render(plt):
        fig, axes = plt.subplots(1, 2, figsize=(9, 3.5))
        for ax, n in zip(axes, params["N"]):
            grid = grids[n]
            x, y = np.meshgrid(grid.x_axis.values, grid.y_axis.values,
                               indexing="ij")
            ax.pcolormesh(x, y, grid.values, shading="nearest", cmap="inferno")
            ax.set_yscale("log")
            ax.set_title(f"N={n}")
            ax.set_xlabel("Delta")
            ax.set_ylabel("gamma")
        fig.tight_layout()
        return fig

    _maybe_plot(plot, render, os.path.join(out_dir, "fig4.svg"))
    return params


def _reproduce_fig5(out_dir: str, plot: bool) -> dict:
    runs = [(6, 0.5, 2e4), (6, 0.75, 1e4), (6, 1.0, 5e3), (8, 0.5, 2e5)]
    params = {"runs": [{"N": n, "Delta": d, "t_max": t} for n, d, t in runs],
              "J": 1.0, "steps": 2000, "target": "ghz", "gamma": "optimized"}
    curves = []
    for n, delta, t_max in runs:
        template = models.ModelSpec(models.ModelKind.TRANSVERSE_ISING, N=n,
                                    J=1.0, Delta=delta)
        target = models.target_state("ghz", n)
        g_star, _ = analysis.optimize_gamma(template, target, t_max)
        spec = models.ModelSpec(models.ModelKind.TRANSVERSE_ISING, N=n, J=1.0,
                                Delta=delta, gamma=g_star)
        trace = dynamics.evolve_trace(spec, dynamics.default_initial_state(spec),
                                      target, t_max, params["steps"],
                                      target_name="ghz")
        _write(os.path.join(out_dir, f"fig5_ghz_N{n}_Delta{delta}.csv"),
               serialize.trace_to_csv(trace))
        curves.append((n, delta, g_star, trace))
    params["optimized_gammas"] = {f"N{n}_Delta{d}": g for n, d, g, _ in curves}

    def render(plt):
        fig, ax = plt.subplots()
        for n, d, g, tr in curves:
            ax.plot(tr.times, tr.fidelities, label=f"N={n}, Delta={d}")
        ax.set_xscale("log")
        ax.set_xlabel("t")
        ax.set_ylabel("f(t)")
        ax.legend()
        return fig

    _maybe_plot(plot, render, os.path.join(out_dir, "fig5.svg"))
    return params


def cmd_reproduce(args) -> int:
    builders = {1: _reproduce_fig1, 2: _reproduce_fig2, 3: _reproduce_fig3,
                4: _reproduce_fig4, 5: _reproduce_fig5}
    if args.figure not in builders:
        raise ConfigError(f"--figure must be one of 1..5, got {args.figure}")
    os.makedirs(args.out_dir, exist_ok=True)
    params = builders[args.figure](args.out_dir, args.plot)
    manifest = {
        "figure": args.figure,
        "note": "parameters chosen to match the qualitative claims; "
                "source publication prints no figure parameter values",
        "parameters": params,
    }
    _write(os.path.join(args.out_dir, f"fig{args.figure}_manifest.json"),
           json.dumps(manifest, indent=2, default=str))
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--model", required=True, choices=["xy", "ising"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--v", type=float, default=0.0)
    p.add_argument("--gamma", type=float, default=0.0)
    p.add_argument("--j", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--boundary", choices=["periodic", "open"], default="periodic")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="epchain",
        description="Exceptional-point spectra, phase diagrams and "
                    "entangled-state preparation dynamics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues of one model instance")
    _add_model_flags(p)
    p.add_argument("--full-space", action="store_true",
                   help="use the 2^N spin space for the XY chain")
    p.add_argument("--vectors", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("phase-diagram", help="max|Im eps| over a parameter grid")
    _add_model_flags(p)
    p.add_argument("--x-range", required=True, metavar="MIN:MAX:SCALE:COUNT")
    p.add_argument("--gamma-range", required=True, metavar="MIN:MAX:SCALE:COUNT")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_phase_diagram)

    p = sub.add_parser("evolve", help="fidelity trace of one evolution run")
    _add_model_flags(p)
    p.add_argument("--target", required=True, choices=["w", "bell", "ghz"])
    p.add_argument("--init", default="", metavar="site:<k>|bits:<string>")
    p.add_argument("--t-max", type=float, required=True)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("boundary", help="critical gamma by all applicable methods")
    _add_model_flags(p)
    p.add_argument("--x-range", required=True, metavar="MIN:MAX:SCALE:COUNT")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_boundary)

    p = sub.add_parser("reproduce", help="emit a scaled reproduction dataset")
    p.add_argument("--figure", type=int, required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--plot", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationMismatch as exc:
        print(f"validation mismatch: {exc}", file=sys.stderr)
        return 4
    except (EpchainError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
