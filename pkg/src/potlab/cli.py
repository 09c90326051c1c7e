"""Command-line interface: capacity runs, monotone profiles, inequality checks.

Exit codes: 0 on success, 2 on computational failure, 3 on configuration or
input errors.  Flags override config-file keys, which override defaults; the
config file is INI-style (``key = value`` under sections).  All floating
output is printed with 12 significant digits so regression diffs are
meaningful; repeated runs with the same config and seed are byte-identical
modulo the versioned header line.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, PotlabError
from .field import PotentialField, asymptotic_fit
from .inequalities import (
    check_cap_bounds,
    check_lp_gradient,
    check_willmore,
    format_report_table,
    overdetermined_residual,
    report_to_dict,
)
from .levelset import DEFAULT_RESOLUTION, boundary_level, extract_level
from .mesh import Ball, Ellipsoid, TriMesh, load_mesh, make_shape
from .monotone import DEFAULT_T_GRID, build_profiles, write_profile_csv
from .oracle import ellipsoid_capacity
from .solver import capacity_flux

SUITES = ("willmore", "capbounds", "lpgrad", "overdetermined")


@dataclass
class RunConfig:
    shape: str | None = None          # "ball:R" or "ellipsoid:a,b,c"
    mesh_path: str | None = None
    refine: int = 4
    t_grid: tuple = DEFAULT_T_GRID
    p_list: tuple = (1.5, 2.0, 3.0)
    resolution: int = DEFAULT_RESOLUTION
    flux_level: float = 0.5
    cap_tol: float = 0.01
    delta: float = 0.01               # monotonicity tolerance, scale-relative
    eps_grad: float | None = None
    suite: tuple = SUITES
    q_exponent: float = 5.0
    out_dir: str = "potlab_out"
    seed: int = 0


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated float list, got {text!r}") from exc


def _load_config_file(path: str) -> dict:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    flat: dict = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            flat[key.replace("-", "_")] = value
    return flat


def _build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    overlay: dict = {}
    if getattr(args, "config", None):
        overlay.update(_load_config_file(args.config))
    for key in ("shape", "mesh_path", "refine", "t_grid", "p_list", "resolution",
                "flux_level", "cap_tol", "delta", "eps_grad", "suite",
                "q_exponent", "out_dir", "seed"):
        arg = getattr(args, key, None)
        if arg is not None:
            overlay[key] = arg
    for key, value in overlay.items():
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config key {key!r}")
        if key in ("t_grid", "p_list") and isinstance(value, str):
            value = _parse_floats(value)
        if key == "suite" and isinstance(value, str):
            value = tuple(value.split(",")) if value != "all" else SUITES
        if key in ("refine", "resolution", "seed") and isinstance(value, str):
            value = int(value)
        if key in ("flux_level", "cap_tol", "delta", "eps_grad", "q_exponent") \
                and isinstance(value, str):
            value = float(value)
        setattr(cfg, key, value)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.shape is None and cfg.mesh_path is None:
        raise ConfigError("either --shape or --mesh is required")
    if cfg.refine < 0 or cfg.refine > 7:
        raise ConfigError(f"refine must be in [0, 7], got {cfg.refine}")
    if cfg.resolution < 16:
        raise ConfigError(f"resolution must be >= 16, got {cfg.resolution}")
    if any(t <= 0.0 or t > 1.0 for t in cfg.t_grid):
        raise ConfigError(f"t grid must lie in (0, 1], got {cfg.t_grid}")
    if not 0.0 < cfg.flux_level < 1.0:
        raise ConfigError(f"flux level must be in (0, 1), got {cfg.flux_level}")
    for name in cfg.suite:
        if name not in SUITES:
            raise ConfigError(f"unknown suite {name!r} (choose from {SUITES})")


def _parse_shape(spec: str):
    kind, _, params = spec.partition(":")
    values = _parse_floats(params) if params else ()
    if kind == "ball":
        if len(values) != 1:
            raise ConfigError(f"ball takes one radius, got {spec!r}")
        return Ball(values[0])
    if kind == "ellipsoid":
        if len(values) != 3:
            raise ConfigError(f"ellipsoid takes three semi-axes, got {spec!r}")
        try:
            return Ellipsoid(*values)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown shape {spec!r} (expected ball:R or ellipsoid:a,b,c)")


def _build_mesh(cfg: RunConfig) -> TriMesh:
    if cfg.mesh_path is not None:
        try:
            return load_mesh(cfg.mesh_path)
        except PotlabError as exc:
            raise ConfigError(str(exc)) from exc
    return make_shape(_parse_shape(cfg.shape), cfg.refine)


def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _header(command: str, cfg: RunConfig) -> str:
    target = cfg.mesh_path if cfg.mesh_path else f"{cfg.shape} refine={cfg.refine}"
    return f"potlab {__version__} {command} {target} seed={cfg.seed}"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


# -- subcommands --------------------------------------------------------------


def cmd_capacity(cfg: RunConfig) -> int:
    mesh = _build_mesh(cfg)
    field = PotentialField.from_mesh(mesh, eps_grad=cfg.eps_grad)
    cap = field.capacity
    print(f"# {_header('capacity', cfg)}")
    print(f"capacity_total_charge = {_fmt(cap.value)}")
    level = extract_level(field, cfg.flux_level, resolution=cfg.resolution)
    flux = capacity_flux(field, level)
    print(f"capacity_flux(t={cfg.flux_level:g}) = {_fmt(flux.value)}")
    rel_methods = abs(flux.value - cap.value) / cap.value
    print(f"method_relative_gap = {_fmt(rel_methods)}")
    far = asymptotic_fit(field)
    print(f"far_field_fit = {_fmt(far)}")
    ok = rel_methods <= cfg.cap_tol
    if mesh.shape is not None:
        oracle = ellipsoid_capacity(*mesh.shape.semi_axes)
        rel = abs(cap.value - oracle.value) / oracle.value
        print(f"oracle = {_fmt(oracle.value)}")
        print(f"oracle_relative_error = {_fmt(rel)}")
        ok = ok and rel <= cfg.cap_tol
    print(f"within_tolerance = {ok}")
    return 0 if ok else 2


def cmd_profile(cfg: RunConfig) -> int:
    for p in cfg.p_list:
        if p < 1.5:
            raise ConfigError(
                f"p below 2 - 1/(n-1) = 1.5 for derivatives: {p:g}"
            )
    mesh = _build_mesh(cfg)
    field = PotentialField.from_mesh(mesh, eps_grad=cfg.eps_grad)
    from .monotone import derivative_scale, extract_levels

    levels = extract_levels(field, sorted(cfg.t_grid), cfg.resolution)
    profiles = build_profiles(field, cfg.p_list, cfg.t_grid, levels=levels)
    out = _out_dir(cfg)
    all_ok = True
    print(f"# {_header('profile', cfg)}")
    for p, profile in profiles.items():
        path = out / f"profile_p{p:g}.csv"
        write_profile_csv(profile, path, _header(f"profile p={p:g}", cfg))
        scales = np.array([
            derivative_scale(field, lv, p) for lv in levels
        ])
        floor = -cfg.delta * scales
        mono_ok = bool(np.all(profile.U_prime >= floor))
        all_ok = all_ok and mono_ok and profile.limit_ok
        print(f"p = {p:g}: min_U_prime = {_fmt(profile.min_U_prime)} "
              f"monotone = {mono_ok} limit_ok = {profile.limit_ok} "
              f"csv = {path}")
    return 0 if all_ok else 2


def cmd_check(cfg: RunConfig) -> int:
    mesh = _build_mesh(cfg)
    field = PotentialField.from_mesh(mesh, eps_grad=cfg.eps_grad)
    reports = []
    residual = None
    if "willmore" in cfg.suite:
        reports.append(check_willmore(mesh))
    if "capbounds" in cfg.suite:
        p = min(cfg.p_list)
        if p < 1.5 or p >= 2.0:
            p = 1.5
        reports.extend(check_cap_bounds(field, mesh, p, cfg.q_exponent))
    if "lpgrad" in cfg.suite:
        blevel = boundary_level(field)
        for p in cfg.p_list:
            reports.extend(check_lp_gradient(field, blevel, p))
    if "overdetermined" in cfg.suite:
        residual = overdetermined_residual(field, boundary_level(field))
    out = _out_dir(cfg)
    path = out / "reports.jsonl"
    with open(path, "w") as fh:
        fh.write(json.dumps({"header": _header("check", cfg)}) + "\n")
        for report in reports:
            fh.write(json.dumps(report_to_dict(report), sort_keys=True) + "\n")
        if residual is not None:
            fh.write(json.dumps({
                "name": "overdetermined-residual",
                "sup": float(f"{residual.sup:.12g}"),
                "l2": float(f"{residual.l2:.12g}"),
            }, sort_keys=True) + "\n")
    print(f"# {_header('check', cfg)}")
    print(format_report_table(reports))
    if residual is not None:
        print(f"overdetermined residual: sup = {_fmt(residual.sup)} "
              f"l2 = {_fmt(residual.l2)}")
    print(f"reports = {path}")
    ok = all(r.satisfied for r in reports)
    print(f"all_satisfied = {ok}")
    return 0 if ok else 2


# -- entry point ---------------------------------------------------------------


def _make_parser() -> argparse.ArgumentParser:
    class Parser(argparse.ArgumentParser):
        def error(self, message):
            raise ConfigError(message)

    parser = Parser(prog="potlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("capacity", cmd_capacity), ("profile", cmd_profile),
                     ("check", cmd_check)):
        p = sub.add_parser(name)
        p.set_defaults(func=fn)
        p.add_argument("--shape", help="ball:R or ellipsoid:a,b,c")
        p.add_argument("--mesh", dest="mesh_path", help="OFF/OBJ mesh path")
        p.add_argument("--refine", type=int, help="icosphere subdivisions")
        p.add_argument("--p", dest="p_list", type=_parse_floats,
                       help="comma-separated exponent list")
        p.add_argument("--t-grid", dest="t_grid", type=_parse_floats,
                       help="comma-separated level values in (0, 1]")
        p.add_argument("--resolution", type=int, help="grid cells per axis")
        p.add_argument("--flux-level", dest="flux_level", type=float)
        p.add_argument("--cap-tol", dest="cap_tol", type=float)
        p.add_argument("--delta", type=float, help="monotonicity tolerance")
        p.add_argument("--eps-grad", dest="eps_grad", type=float)
        p.add_argument("--q", dest="q_exponent", type=float)
        p.add_argument("--suite", help="comma list or 'all'")
        p.add_argument("--out", dest="out_dir")
        p.add_argument("--seed", type=int)
        p.add_argument("--config", help="INI config file")
    return parser


def main(argv=None) -> int:
    try:
        args = _make_parser().parse_args(argv)
        cfg = _build_config(args)
        return args.func(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except PotlabError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
