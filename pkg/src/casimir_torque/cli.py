"""Command-line front end: parameter sweeps written as CSV or JSON datasets.

Output files are byte-reproducible: fixed column order, 9 significant digits,
and a comment header holding the resolved configuration (no timestamps).
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .config import NM, RunConfig, load_config
from .errors import CasimirError, ConfigError
from .landscape import (
    CorrugationPair,
    Orientation,
    PlateExtent,
    lateral_force,
    max_torque,
    normalized_landscape,
    optimize_corrugation_wavelength,
    stability_threshold,
)
from .lifshitz import PlaneGeometry, PlasmaMaterial
from .response import ResponseBackend, perfect_asymptote_scaled, plasma_asymptote_scaled, response, rho_scaled

PROG = "casimir-torque"


class Dataset:
    def __init__(self, columns, rows):
        self.columns = list(columns)
        self.rows = [list(r) for r in rows]


def _fmt(value):
    if isinstance(value, str):
        return value
    return format(float(value) + 0.0, ".9g")  # + 0.0 folds -0 into 0


def _json_value(value):
    if isinstance(value, str):
        return value
    value = float(format(float(value) + 0.0, ".9g"))
    return value if math.isfinite(value) else str(value)


def render(command: str, cfg: RunConfig, data: Dataset) -> str:
    buf = io.StringIO()
    if cfg.format == "csv":
        buf.write(f"# {PROG} {command}\n")
        for key, text in cfg.header_items():
            buf.write(f"# {key} = {text}\n")
        buf.write(",".join(data.columns) + "\n")
        for row in data.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
    else:
        doc = {
            "command": command,
            "config": dict(cfg.header_items()),
            "columns": data.columns,
            "rows": [[_json_value(v) for v in row] for row in data.rows],
        }
        buf.write(json.dumps(doc, indent=1) + "\n")
    return buf.getvalue()


def _map(cfg, func, items):
    items = list(items)
    if cfg.threads == 1 or len(items) < 2:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        return list(pool.map(func, items))


def _grid(lo, hi, n):
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def _extent(cfg):
    return PlateExtent(cfg.lx_nm * NM, cfg.ly_nm * NM)


def _pair(cfg, k):
    return CorrugationPair(cfg.a1_nm * NM, cfg.a2_nm * NM, k)


def _require_plasma(cfg, what):
    if not isinstance(cfg.material, PlasmaMaterial):
        raise ConfigError(f"{what} needs material.model = plasma")


def _scattering_backend(cfg, what):
    backend = cfg.response_backend
    if not backend.is_scattering:
        raise ConfigError(f"{what} needs a scattering backend (plasma or ideal), got {backend.value!r}")
    if backend is ResponseBackend.SCATTERING_PLASMA:
        _require_plasma(cfg, what)
    return backend


def cmd_landscape(cfg: RunConfig) -> Dataset:
    """Universal energy surface over (b, theta), normalized by (a1 a2 / 2) |G(k)|."""
    lam = cfg.lambda_c_nm * NM
    Ly = cfg.ly_nm * NM
    k = 2.0 * math.pi / lam
    b = _grid(cfg.landscape_b_min, cfg.landscape_b_max, cfg.landscape_b_points) * lam
    theta = _grid(cfg.landscape_theta_min, cfg.landscape_theta_max, cfg.landscape_theta_points) * lam / Ly
    bb, tt = np.meshgrid(b, theta, indexing="ij")
    energy = normalized_landscape(bb, tt, k, Ly)
    rows = zip(bb.ravel(), tt.ravel(), energy.ravel())
    return Dataset(["b_m", "theta_rad", "energy_normalized"], rows)


def cmd_torque_vs_distance(cfg: RunConfig) -> Dataset:
    """Peak torque per area against separation for fixed and optimal corrugation wavelengths."""
    backend = _scattering_backend(cfg, "torque-vs-distance")
    material, extent, spec = cfg.material, _extent(cfg), cfg.quadrature
    distances = np.geomspace(cfg.distance_min_nm, cfg.distance_max_nm, cfg.distance_points) * NM
    fixed = [lam * NM for lam in cfg.distance_fixed_lambda_c_nm]

    def point(L):
        geom = PlaneGeometry(L)
        taus = [max_torque(_pair(cfg, 2.0 * math.pi / lam), extent, geom, material, backend, spec,
                           cfg.guard_fraction, cfg.force).torque_per_area for lam in fixed]
        k_opt = optimize_corrugation_wavelength(geom, material, backend, tol=cfg.optimize_tol, spec=spec)
        best = max_torque(_pair(cfg, k_opt), extent, geom, material, backend, spec, cfg.guard_fraction, cfg.force)
        return [L, *taus, k_opt, best.torque_per_area]

    columns = ["L_m", *(f"tau_lambda_c_{lam:g}nm_N_per_m" for lam in cfg.distance_fixed_lambda_c_nm),
               "k_optimal_per_m", "tau_optimal_N_per_m"]
    return Dataset(columns, _map(cfg, point, distances))


def cmd_torque_vs_k(cfg: RunConfig) -> Dataset:
    """Peak torque per area against k for the plasma, ideal and PFA responses."""
    _require_plasma(cfg, "torque-vs-k")
    geom, material, extent, spec = cfg.geometry, cfg.material, _extent(cfg), cfg.quadrature
    ks = _grid(cfg.k_kl_min, cfg.k_kl_max, cfg.k_points) / geom.L
    backends = (ResponseBackend.SCATTERING_PLASMA, ResponseBackend.SCATTERING_IDEAL, ResponseBackend.PFA)

    def point(k):
        pair = _pair(cfg, k)
        return [k, *(max_torque(pair, extent, geom, material, b, spec, cfg.guard_fraction, cfg.force)
                     .torque_per_area for b in backends)]

    return Dataset(["k_per_m", "tau_plasma_N_per_m", "tau_ideal_N_per_m", "tau_pfa_N_per_m"],
                   _map(cfg, point, ks))


def cmd_rho(cfg: RunConfig) -> Dataset:
    """rho(k) = G(k) / G(0), rho exp(kL), and the two high-k reference curves."""
    backend = cfg.response_backend
    if backend in (ResponseBackend.SCATTERING_PLASMA, ResponseBackend.ASYMPTOTIC_PLASMA_HIGHK):
        _require_plasma(cfg, "rho with a plasma backend")
    geom, material, spec = cfg.geometry, cfg.material, cfg.quadrature
    kls = _grid(cfg.rho_kl_min, cfg.rho_kl_max, cfg.rho_points)

    def point(kl):
        scaled = rho_scaled(kl / geom.L, geom, material, backend, spec)
        return [kl / geom.L, scaled * math.exp(-kl), scaled,
                perfect_asymptote_scaled(kl), plasma_asymptote_scaled(kl)]

    columns = ["k_per_m", "rho", "rho_exp_kL", "rho_exp_kL_perfect_asymptote", "rho_exp_kL_plasma_asymptote"]
    return Dataset(columns, _map(cfg, point, kls))


def cmd_optimize(cfg: RunConfig) -> Dataset:
    """Optimal corrugation wavelength and the resulting torque figures at the configured geometry."""
    backend = _scattering_backend(cfg, "optimize")
    geom, material, extent, spec = cfg.geometry, cfg.material, _extent(cfg), cfg.quadrature
    k = optimize_corrugation_wavelength(geom, material, backend, tol=cfg.optimize_tol, spec=spec)
    pair = _pair(cfg, k)
    peak = max_torque(pair, extent, geom, material, backend, spec, cfg.guard_fraction, cfg.force)
    threshold = stability_threshold(pair, extent)
    report = [
        ("k_optimal_per_m", k),
        ("kL_optimal", k * geom.L),
        ("lambda_c_optimal_m", pair.lambda_c),
        ("theta_max_torque_rad", peak.theta_at),
        ("theta_max_torque_deg", math.degrees(peak.theta_at)),
        ("stability_threshold_rad", threshold),
        ("stability_threshold_deg", math.degrees(threshold)),
        ("max_torque_per_area_N_per_m", peak.torque_per_area),
        ("tip_arc_at_max_torque_m", 0.5 * extent.Ly * peak.theta_at),
    ]
    return Dataset(["quantity", "value"], report)


def cmd_lateral_force(cfg: RunConfig) -> Dataset:
    """Lateral force per area against relative displacement b at the configured angle."""
    geom, material, extent, spec = cfg.geometry, cfg.material, _extent(cfg), cfg.quadrature
    backend = cfg.response_backend
    if backend in (ResponseBackend.SCATTERING_PLASMA, ResponseBackend.ASYMPTOTIC_PLASMA_HIGHK):
        _require_plasma(cfg, "lateral-force with a plasma backend")
    lam = cfg.lambda_c_nm * NM
    k = 2.0 * math.pi / lam
    G = response(k, geom, material, backend, spec)
    orient = Orientation(cfg.theta_rad)
    bs = _grid(cfg.lateral_b_min, cfg.lateral_b_max, cfg.lateral_b_points) * lam
    rows = []
    for b in bs:
        pair = CorrugationPair(cfg.a1_nm * NM, cfg.a2_nm * NM, k, b1=0.0, b2=float(b))
        rows.append([b, lateral_force(pair, extent, orient, G, "general", cfg.guard_fraction, cfg.force)])
    return Dataset(["b_m", "force_per_area_N_per_m2"], rows)


COMMANDS = {
    "landscape": cmd_landscape,
    "torque-vs-distance": cmd_torque_vs_distance,
    "torque-vs-k": cmd_torque_vs_k,
    "rho": cmd_rho,
    "optimize": cmd_optimize,
    "lateral-force": cmd_lateral_force,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat 'dotted.key = value' file, lengths in nm")
    common.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--backend", choices=[b.value for b in ResponseBackend])
    common.add_argument("--tol", type=float, metavar="REL", help="relative tolerance of G(k)")
    common.add_argument("--threads", type=int, help="worker threads (default: CTL_THREADS or core count)")
    common.add_argument("--force", action="store_true", help="downgrade amplitude-guard rejections to warnings")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override one config key; may be repeated")
    parser = _Parser(prog=PROG, description="Casimir torque between corrugated plates.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, func in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=func.__doc__.splitlines()[0])
    return parser


def _overrides(args):
    out = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    flags = {"run.out": args.out, "run.format": args.format, "run.backend": args.backend,
             "run.tol": args.tol, "run.threads": args.threads}
    out.update({key: str(v) for key, v in flags.items() if v is not None})
    if args.force:
        out["run.force"] = "true"
    return out


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config, _overrides(args))
    text = render(args.command, cfg, COMMANDS[args.command](cfg))
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write {cfg.out}: {exc}") from None
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except CasimirError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
