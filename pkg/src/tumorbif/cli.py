"""Command-line front end: ``tumorbif {stationary|bifurcation|certify|slope|simulate|table1}``.

Configuration precedence is command-line flag > ``--config`` file > default.
Exit codes: 0 success, 1 certificate or solver failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import certificates as cert
from .bifurcation import b_n, mu2_slope, mu_2_closed, mu_n, spectrum_neg_h
from .dynamics import ModeState, evolve_modes, stability_diagram
from .errors import CertificateViolation, ConvergenceError, DegenerateParameterError, DomainError
from .report import make_meta, to_csv, to_json
from .stationary import ModelParams, boundary_derivs, p_s_at, sigma_s_at, solve_radius

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
TWO_PATH_TOL = 1e-10
SERIES_TOL = 1e-8

DEFAULT_BETAS = (0.1, 1.0, 10.0, 100.0)
DEFAULT_SIGMAS = tuple(round(0.1 * k, 12) for k in range(1, 10))
DEFAULT_R_GRID = "0.25:50:0.25"
DEFAULT_MODES = "1,0=1;2,0=1;2,2=1;3,0=1;4,0=1"

DEFAULTS = {
    "beta": 1.0,
    "sigma_tilde": 0.5,
    "gamma": 1.0,
    "mu": None,
    "grid": None,
    "format": "csv",
    "out": None,
    "figure": None,
    "threads": os.cpu_count() or 1,
    "n_max": 10,
    "terms": 60,
    "r_max": 10.0,
    "mu_factor": 0.95,
    "t_end": 1.0,
    "t_samples": 11,
    "modes": DEFAULT_MODES,
    "seed": None,
    "eps_max": 0.1,
    "eps_samples": 21,
    "method": "exact",
    "inject_fault": None,
}
_FLOAT_KEYS = {"beta", "sigma_tilde", "gamma", "mu", "r_max", "mu_factor", "t_end", "eps_max"}
_INT_KEYS = {"threads", "n_max", "terms", "t_samples", "seed", "eps_samples"}
_CHOICES = {"format": ("csv", "json"), "method": ("exact", "rk4")}


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- config


def _coerce(key, raw):
    if raw is None:
        return None
    try:
        if key in _FLOAT_KEYS:
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError
            return val
        if key in _INT_KEYS:
            return int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    val = str(raw)
    if key in _CHOICES and val not in _CHOICES[key]:
        raise ConfigError(f"{key} must be one of {_CHOICES[key]}, got {val!r}")
    return val


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes equal underscores."""
    out = {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, val = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS or key in ("config",):
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = _coerce(key, val)
    return out


def _parse_values(key, text):
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{key}: range must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if not step > 0:
            raise ConfigError(f"{key}: step must be positive")
        count = math.floor((stop - start) / step + 1e-9) + 1
        if count < 1:
            raise ConfigError(f"{key}: empty range {text}")
        return [round(start + k * step, 12) for k in range(count)]
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise ConfigError(f"{key}: empty list")
    return vals


def parse_grid(spec: str | None) -> dict[str, list[float]]:
    """``"beta=0.1,1,10;sigma_tilde=0.1:0.9:0.1"`` -> ``{"beta": [...], ...}``."""
    if not spec:
        return {}
    grid = {}
    for part in spec.split(";"):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(f"grid entry {part!r} lacks '='")
        key, vals = part.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in ("beta", "sigma_tilde", "R"):
            raise ConfigError(f"unknown grid axis {key!r}")
        try:
            grid[key] = _parse_values(key, vals)
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"grid axis {key}: {exc}") from None
    return grid


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config_file(args.config))
    for key in DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = _coerce(key, val)
    if cfg["threads"] is None or cfg["threads"] < 1:
        raise ConfigError("threads must be >= 1")
    return cfg


def _point_params(cfg, beta=None, sigma_tilde=None) -> ModelParams:
    try:
        return ModelParams(
            cfg["beta"] if beta is None else beta,
            cfg["sigma_tilde"] if sigma_tilde is None else sigma_tilde,
            cfg["gamma"],
        )
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def _grid_points(cfg, default_full: bool):
    grid = parse_grid(cfg["grid"])
    if default_full and not grid:
        betas, sigmas = list(DEFAULT_BETAS), list(DEFAULT_SIGMAS)
    else:
        betas = grid.get("beta", [cfg["beta"]])
        sigmas = grid.get("sigma_tilde", [cfg["sigma_tilde"]])
    pts = [_point_params(cfg, b, s) for b in betas for s in sigmas]
    return pts, {"beta": betas, "sigma_tilde": sigmas}


def _pmap(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))  # map keeps grid order
    return [fn(x) for x in items]


# ---------------------------------------------------------------- output


def _emit(cfg, rows, meta, **sections):
    if cfg["format"] == "json":
        text = to_json(rows, meta, **sections)
    else:
        text = to_csv(rows, meta)
    if cfg["out"]:
        Path(cfg["out"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _secondary_path(path: str, tag: str) -> str:
    p = Path(path)
    return str(p.with_name(f"{p.stem}.{tag}{p.suffix}"))


def _figure(cfg, kind, rows, tag=None):
    if not cfg["figure"]:
        return
    from . import plotting

    path = cfg["figure"] if tag is None else _secondary_path(cfg["figure"], tag)
    getattr(plotting, f"{kind}_figure")(rows, path)


def _params_meta(cfg):
    return {k: cfg[k] for k in ("beta", "sigma_tilde", "gamma")}


# ---------------------------------------------------------------- commands


def _stationary_row(p: ModelParams, mu_override):
    big_r = solve_radius(p)
    mu = mu_override if mu_override is not None else mu_n(2, big_r, p.beta, p.sigma_tilde, p.gamma)
    eq = boundary_derivs(big_r, p.beta, mu, p.sigma_tilde, p.gamma)
    s, p_ = eq.sigma_boundary_derivs, eq.p_boundary_derivs
    names = ("", "_r", "_rr", "_rrr")
    derivs = {f"sigma_s{k}": v for k, v in zip(names, s)}
    derivs.update({f"p_s{k}": v for k, v in zip(names, p_)})
    return {"beta": p.beta, "sigma_tilde": p.sigma_tilde, "gamma": p.gamma, "mu": mu,
            "R": big_r, "residual": eq.residual, "derivs": derivs}


def cmd_stationary(cfg) -> int:
    pts, grid = _grid_points(cfg, default_full=False)
    rows = _pmap(lambda p: _stationary_row(p, cfg["mu"]), pts, cfg["threads"])
    _emit(cfg, rows, make_meta("stationary", _params_meta(cfg), grid))
    if cfg["figure"]:
        r0 = rows[0]
        rs = np.linspace(r0["R"] / 200, r0["R"], 200)
        prof = [{"r": float(r),
                 "sigma_s": sigma_s_at(r, r0["R"], r0["beta"]),
                 "p_s": p_s_at(r, r0["R"], r0["beta"], r0["mu"], r0["sigma_tilde"], r0["gamma"])}
                for r in rs]
        _figure(cfg, "stationary", prof)
    return EXIT_OK if all(r["residual"] <= 1e-12 for r in rows) else EXIT_FAIL


def _bifurcation_rows(p: ModelParams, n_max: int):
    big_r = solve_radius(p)
    mu2 = mu_n(2, big_r, p.beta, p.sigma_tilde, p.gamma)
    rows = []
    for n in range(1, n_max + 1):
        row = {"beta": p.beta, "sigma_tilde": p.sigma_tilde, "R": big_r, "n": n}
        try:
            if n == 1:
                row.update(mu_n=math.nan, B_n=0.0, lambda_n=0.0)
            else:
                m = mu_n(n, big_r, p.beta, p.sigma_tilde, p.gamma)
                lam = spectrum_neg_h(mu2, big_r, p.beta, p.sigma_tilde, p.gamma, [n])[0]
                row.update(mu_n=m, B_n=b_n(n, big_r, p.gamma, m), lambda_n=lam)
            row["flag"] = "bifurcation" if n == 2 else ("translation" if n == 1 else "")
        except DegenerateParameterError:
            row.update(mu_n=math.nan, B_n=math.nan, lambda_n=math.nan, flag="degenerate")
        rows.append(row)
    return rows


def cmd_bifurcation(cfg) -> int:
    if not 2 <= cfg["n_max"] <= 50:
        raise ConfigError("n_max must lie in [2, 50]")
    pts, grid = _grid_points(cfg, default_full=False)
    blocks = _pmap(lambda p: _bifurcation_rows(p, cfg["n_max"]), pts, cfg["threads"])
    rows = [r for b in blocks for r in b]
    _emit(cfg, rows, make_meta("bifurcation", _params_meta(cfg), grid, n_max=cfg["n_max"]))
    _figure(cfg, "bifurcation", blocks[0])
    ok = True
    for block in blocks:
        mus = [r["mu_n"] for r in block if r["n"] >= 2]
        ok &= all(math.isfinite(m) for m in mus) and all(b > a for a, b in zip(mus, mus[1:]))
    return EXIT_OK if ok else EXIT_FAIL


def _slope_row(p: ModelParams):
    big_r = solve_radius(p)
    mu2 = mu_n(2, big_r, p.beta, p.sigma_tilde, p.gamma)
    mu2b = mu_2_closed(big_r, p.beta, p.gamma)
    c = mu2_slope(big_r, p.beta, mu2, p.gamma)
    row = {
        "beta": p.beta, "sigma_tilde": p.sigma_tilde, "R": big_r,
        "mu2": mu2, "mu2_delta": abs(mu2 - mu2b) / mu2,
        "E1": c.e1, "E2": c.e2, "E3": c.e3,
        "bracket_assembly": c.bracket, "bracket_compact": c.bracket_compact,
        "bracket_delta": c.bracket_delta, "hrmu": c.hrmu,
        "slope": c.slope, "slope_closed": c.slope_closed, "slope_delta": c.slope_delta,
        "a": c.a,
    }
    row["pass"] = bool(
        c.signs_ok and max(row["mu2_delta"], c.bracket_delta, c.slope_delta) <= TWO_PATH_TOL
    )
    return row


def cmd_slope(cfg) -> int:
    pts, grid = _grid_points(cfg, default_full=True)
    rows = _pmap(_slope_row, pts, cfg["threads"])
    _emit(cfg, rows, make_meta("slope", {"gamma": cfg["gamma"]}, grid))
    _figure(cfg, "slope", rows)
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAIL


def _fault_coeffs(cfg):
    a = list(cert.A_COEFFS)
    if cfg["inject_fault"] == "table1":
        a[-1] += 1  # corrupt the n^7 coefficient
    elif cfg["inject_fault"] not in (None, ""):
        raise ConfigError(f"unknown fault {cfg['inject_fault']!r}")
    return tuple(a)


def _table1_rows(a_coeffs):
    rows = []
    for t in cert.table1(a_coeffs=a_coeffs):
        pub = cert.TABLE1_PUBLISHED[t.n]
        rows.append({"check": "table1", "item": f"n={t.n}", "value": str(t.combined),
                     "expected": str(pub), "pass": t.combined == pub})
    return rows


def cmd_table1(cfg) -> int:
    a = _fault_coeffs(cfg)
    rows = []
    for t, base in zip(cert.table1(a_coeffs=a), _table1_rows(a)):
        rows.append({"n": t.n, "a_n": str(t.a_n), "b_n": str(t.b_n), "combined": str(t.combined),
                     "published": base["expected"], "pass": base["pass"]})
    _emit(cfg, rows, make_meta("table1", {}, {}))
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAIL


def _r_grid(cfg):
    grid = parse_grid(cfg["grid"])
    vals = grid.get("R") or _parse_values("R", DEFAULT_R_GRID)
    if any(v <= 0 or v > 300 for v in vals):
        raise ConfigError("R grid must lie in (0, 300]")
    return vals


def cmd_certify(cfg) -> int:
    a_coeffs = _fault_coeffs(cfg)
    if not 0 < cfg["r_max"] <= cert.SERIES_MAX_R:
        raise ConfigError(f"r_max must lie in (0, {cert.SERIES_MAX_R:g}]")
    if cfg["terms"] < 1:
        raise ConfigError("terms must be >= 1")
    rows = _table1_rows(a_coeffs)

    try:
        for power, val in cert.low_order_cancellation():
            rows.append({"check": "cancellation", "item": f"R^{power}", "value": str(val),
                         "expected": "0", "pass": val == 0})
    except CertificateViolation as exc:
        rows.append({"check": "cancellation", "item": "all", "value": str(exc),
                     "expected": "0", "pass": False})

    try:
        tail = cert.tail_bracket_certificate()
        for name, val in {**tail["a_brackets"], **tail["b_brackets"]}.items():
            rows.append({"check": "tail_bracket", "item": f"n={tail['n']}:{name}",
                         "value": str(val), "expected": ">=0", "pass": val >= 0})
    except CertificateViolation as exc:
        rows.append({"check": "tail_bracket", "item": "n=18", "value": str(exc),
                     "expected": ">=0", "pass": False})

    r = 0.5
    while r <= cfg["r_max"] + 1e-12:
        s, _ = cert.g1_series(r, cfg["terms"], a_coeffs=a_coeffs)
        g = cert.g1_closed(r)
        err = abs(s - g) / abs(g)
        rows.append({"check": "g1_series", "item": f"R={r!r}", "value": err,
                     "expected": f"<={SERIES_TOL!r}", "pass": err <= SERIES_TOL})
        r = round(r + 0.5, 12)

    pts, grid = _grid_points(cfg, default_full=True)
    grid["R"] = _r_grid(cfg)
    rep = cert.sign_sweep(grid["beta"], grid["sigma_tilde"], grid["R"], cfg["gamma"],
                          threads=cfg["threads"])
    for row in rep.rows:
        for key in ("E1", "E2", "E3", "G1", "slope"):
            rows.append({"check": "sweep", "item": f"{key}@beta={row['beta']!r};sigma_tilde="
                         f"{row['sigma_tilde']!r}", "value": row[key], "expected": "<0",
                         "pass": row[key] < 0})
    for row in rep.r_rows:
        for key in ("E1", "E2", "E3", "G1"):
            rows.append({"check": "sign_R", "item": f"{key}@R={row['R']!r}", "value": row[key],
                         "expected": "<0", "pass": row[key] < 0})

    _emit(cfg, rows, make_meta("certify", {"gamma": cfg["gamma"]}, grid, terms=cfg["terms"],
                               r_max=cfg["r_max"]))
    _figure(cfg, "g1", rep.r_rows)
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAIL


def _parse_modes(text: str) -> dict:
    modes = {}
    for part in text.split(";"):
        if not part.strip():
            continue
        try:
            nm, amp = part.split("=")
            n, m = (int(x) for x in nm.split(","))
            modes[(n, m)] = float(amp)
        except ValueError:
            raise ConfigError(f"mode spec {part!r} is not 'n,m=amplitude'") from None
    if not modes:
        raise ConfigError("no modes given")
    return modes


def cmd_simulate(cfg) -> int:
    p = _point_params(cfg)
    if cfg["t_end"] < 0 or cfg["t_samples"] < 2:
        raise ConfigError("need t_end >= 0 and t_samples >= 2")
    if not cfg["mu_factor"] > 0:
        raise ConfigError("mu_factor must be positive")
    n_max = min(cfg["n_max"], 16) if cfg["n_max"] else 16
    if cfg["seed"] is not None:
        rng = np.random.default_rng(cfg["seed"])
        modes = {(n, m): float(rng.uniform(-1, 1))
                 for n in range(1, n_max + 1) for m in range(-n, n + 1)}
    else:
        modes = _parse_modes(cfg["modes"])
    try:
        state = ModeState(modes)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None

    big_r = solve_radius(p)
    mu2 = mu_n(2, big_r, p.beta, p.sigma_tilde, p.gamma)
    mu = cfg["mu_factor"] * mu2
    ts = [cfg["t_end"] * k / (cfg["t_samples"] - 1) for k in range(cfg["t_samples"])]
    rows = []
    for t in ts:
        st = evolve_modes(state, mu, t, params=p, big_r=big_r, method=cfg["method"], n_max=n_max)
        for (n, m), amp in st.amplitudes.items():
            rows.append({"t": t, "n": n, "m": m, "amplitude": amp})

    a = mu2_slope(big_r, p.beta, mu2, p.gamma).a
    diagram = stability_diagram(cfg["eps_max"], a, cfg["eps_samples"])
    meta = make_meta("simulate", _params_meta(cfg), {}, R=big_r, mu2=mu2, mu=mu, a=a,
                     method=cfg["method"], eps_axis="first order in eps")
    if cfg["format"] == "json":
        _emit(cfg, rows, meta, stability=diagram)
    else:
        text = to_csv(rows, meta)
        dtext = to_csv(diagram, {**meta, "table": "stability"})
        if cfg["out"]:
            Path(cfg["out"]).write_text(text, encoding="utf-8")
            Path(_secondary_path(cfg["out"], "stability")).write_text(dtext, encoding="utf-8")
        else:
            sys.stdout.write(text + "\n" + dtext)
    _figure(cfg, "modes", rows)
    _figure(cfg, "stability", diagram, tag="stability")
    ok = all(r["full_verdict"] == "unstable" for r in diagram if r["eps"] != 0)
    return EXIT_OK if ok and a < 0 else EXIT_FAIL


COMMANDS = {
    "stationary": (cmd_stationary, "stationary radius and boundary derivatives"),
    "bifurcation": (cmd_bifurcation, "mu_n, B_n and the spectrum at mu_2"),
    "certify": (cmd_certify, "all sign and exact-integer certificates"),
    "slope": (cmd_slope, "two-path mu_2'(0) certificates over a grid"),
    "simulate": (cmd_simulate, "linear mode dynamics and the stability diagram"),
    "table1": (cmd_table1, "exact-integer series coefficients n = 4..17"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--beta", help="nutrient supply rate (> 0)")
    g.add_argument("--sigma-tilde", dest="sigma_tilde", help="threshold concentration in (0, 1)")
    g.add_argument("--gamma", help="cell adhesiveness (> 0)")
    g.add_argument("--grid", help='e.g. "beta=0.1,1,10,100;sigma_tilde=0.1:0.9:0.1"')
    g.add_argument("--format", choices=("csv", "json"))
    g.add_argument("--out", help="output file (default stdout)")
    g.add_argument("--figure", help="also render a matplotlib figure to this path")
    g.add_argument("--threads", help="worker threads for grid sweeps (default: cores)")
    g.add_argument("--config", help="flat key = value file")

    parser = argparse.ArgumentParser(
        prog="tumorbif",
        description="Bifurcation values, sign certificates and linear stability of the radially "
                    "symmetric tumor equilibrium with a Robin nutrient boundary condition.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {name: sub.add_parser(name, parents=[common], help=h)
            for name, (_, h) in COMMANDS.items()}
    subs["stationary"].add_argument("--mu", help="pressure scale (default mu_2)")
    subs["bifurcation"].add_argument("--n-max", dest="n_max")
    for name in ("certify", "table1"):
        subs[name].add_argument("--inject-fault", dest="inject_fault", help=argparse.SUPPRESS)
    subs["certify"].add_argument("--terms", help="series terms (default 60)")
    subs["certify"].add_argument("--r-max", dest="r_max", help="series check up to this R")
    sim = subs["simulate"]
    sim.add_argument("--mu-factor", dest="mu_factor", help="mu = factor * mu_2")
    sim.add_argument("--t-end", dest="t_end")
    sim.add_argument("--t-samples", dest="t_samples")
    sim.add_argument("--modes", help='initial amplitudes, e.g. "2,0=1;3,1=0.5"')
    sim.add_argument("--seed", help="random initial amplitudes for all modes up to --n-max")
    sim.add_argument("--n-max", dest="n_max")
    sim.add_argument("--method", choices=("exact", "rk4"))
    sim.add_argument("--eps-max", dest="eps_max")
    sim.add_argument("--eps-samples", dest="eps_samples")
    return parser


def _diag(msg: str) -> None:
    use_color = sys.stderr.isatty() and not os.environ.get("NO_COLOR")
    prefix = "\033[31merror:\033[0m" if use_color else "error:"
    print(f"{prefix} {msg}", file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command][0](cfg)
    except (ConfigError, DomainError) as exc:
        _diag(str(exc))
        return EXIT_CONFIG
    except (ConvergenceError, DegenerateParameterError, CertificateViolation) as exc:
        _diag(str(exc))
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
