"""Config-driven command line front end.

``fracback {evolve,backcast,certify,amplification} --config FILE [--out DIR]``

Each order in the config's ``alpha`` list gets its own directory
``alpha-<value>`` below the output directory; ``index.json`` lists them.
Exit codes: 0 success, 2 config error, 3 numeric-domain error,
4 certificate failure.
"""

from __future__ import annotations

import argparse
import copy
import io
import json
import logging
import math
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np
from jsonschema import Draft202012Validator
from referencing import Registry, Resource

from . import backcast as bc
from .certify import log_convexity_constant, run_certificate, verify_noisy_holder
from .evolve import evolve_trajectory, forward_evolve
from .exceptions import ConvergenceError, DomainError
from .specop import (
    EigenSystem,
    SpectralField,
    advection_diffusion_reduce,
    dirichlet_laplacian_1d,
    fractional_power,
    matrix_operator,
    neumann_laplacian_1d,
    project,
)

log = logging.getLogger("fracback")

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_CERT = 0, 2, 3, 4
COMMANDS = ("evolve", "backcast", "certify", "amplification")
DEFAULT_DELTAS = (1e-1, 1e-2, 1e-3)


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# schemas


def schema_names() -> list[str]:
    files = resources.files("fracback.schemas").iterdir()
    return sorted(f.name for f in files if f.name.endswith(".schema.json"))


def load_schema(name: str) -> dict:
    if not name.endswith(".schema.json"):
        name += ".schema.json"
    return json.loads(resources.files("fracback.schemas").joinpath(name).read_text())


def _registry() -> Registry:
    return Registry().with_resources(
        (n, Resource.from_contents(load_schema(n))) for n in schema_names()
    )


def validator(name: str) -> Draft202012Validator:
    return Draft202012Validator(load_schema(name), registry=_registry())


def validate(doc, name: str) -> None:
    """Raise ``jsonschema.ValidationError`` unless ``doc`` matches the named schema."""
    validator(name).validate(doc)


# ---------------------------------------------------------------------------
# config


def bundled_configs() -> list[str]:
    files = resources.files("fracback.configs").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def load_config(path: str) -> tuple[dict, Path]:
    """Read and validate a config; bare names refer to the bundled configs."""
    p = Path(path)
    if p.is_file():
        text, base = p.read_text(), p.resolve().parent
    elif path in bundled_configs():
        res = resources.files("fracback.configs").joinpath(path + ".json")
        text, base = res.read_text(), Path(str(res)).parent
    else:
        raise ConfigError(f"config file not found: {path}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    errors = sorted(validator("config").iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(k) for k in e.absolute_path) or "<root>"
        raise ConfigError(f"invalid config field '{where}': {e.message}")
    return cfg, base


def apply_overrides(cfg: dict, seed: int | None, modes: int | None) -> dict:
    cfg = copy.deepcopy(cfg)
    if seed is not None:
        cfg.setdefault("noise", {})["seed"] = seed
        if cfg.get("u0", {}).get("kind") == "random":
            cfg["u0"]["seed"] = seed
    if modes is not None:
        op = cfg["operator"]
        while op["kind"] == "fracpower":
            op = op["inner"]
        if op["kind"] != "matrix":
            op["n_modes"] = modes
    return cfg


def _resolve(base: Path, rel: str) -> Path:
    p = Path(rel)
    p = p if p.is_absolute() else base / p
    if not p.is_file():
        raise ConfigError(f"file not found: {rel}")
    return p


def _load_array(path: Path) -> np.ndarray:
    try:
        if path.suffix == ".json":
            return np.asarray(json.loads(path.read_text()), dtype=float)
        return np.loadtxt(path, delimiter="," if path.suffix == ".csv" else None, ndmin=1)
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read numeric data from {path.name}: {exc}") from exc


def build_operator(spec: dict, base: Path, modes: int | None = None) -> EigenSystem:
    kind = spec["kind"]
    n = spec.get("n_modes", 64)
    if kind == "dirichlet":
        return dirichlet_laplacian_1d(spec["l"], n)
    if kind == "neumann":
        return neumann_laplacian_1d(spec["l"], n)
    if kind == "advection":
        return advection_diffusion_reduce(spec["l"], spec["b"], spec["d"], n)
    if kind == "fracpower":
        return fractional_power(build_operator(spec["inner"], base, modes), spec["s"])
    a = _load_array(_resolve(base, spec["path"]))
    if a.ndim != 2:
        raise ConfigError("matrix file must hold a square 2-D array")
    es = matrix_operator(a)
    if modes is not None and modes < es.size:
        raise ConfigError("--modes cannot truncate a matrix operator")
    return es


def build_initial(cfg: dict, es: EigenSystem, base: Path) -> SpectralField:
    """Initial state; random states are scaled into ``I_R`` and ``I_{eps,R}`` (at 0.9 R)."""
    spec = cfg.get("u0", {"kind": "random"})
    kind = spec["kind"]
    if kind == "coefficients":
        c = np.asarray(spec["values"], dtype=float)
        if c.size != es.size:
            raise ConfigError(f"u0/values has {c.size} entries, the operator has {es.size} modes")
        return SpectralField(c, es)
    if kind == "samples":
        v = _load_array(_resolve(base, spec["path"]))
        return project(v, es)
    rng = np.random.default_rng(spec.get("seed", 0))
    p = spec.get("decay_exponent", 3.0)
    u = SpectralField(rng.standard_normal(es.size) / np.arange(1, es.size + 1) ** p, es)
    R, eps = cfg.get("R", 2.0), cfg.get("epsilon", 1.0)
    lam = es.eigenvalues[es.m :]
    plain = float(np.sqrt(np.sum((lam**eps * u.coefficients[es.m :]) ** 2)))
    size = max(u.norm(), u.operator_norm(), u.power_norm(eps), plain)
    return u * (0.9 * R / size)


# ---------------------------------------------------------------------------
# output helpers


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _num(x: float) -> str:
    return repr(float(x))


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else _num(v) for v in row) + "\n")
    return buf.getvalue()


def _write(directory: Path, name: str, text: str, files: list[str]) -> None:
    (directory / name).write_text(text)
    files.append(name)


def _alphas(cfg: dict) -> list[float]:
    a = cfg["alpha"]
    return [float(v) for v in (a if isinstance(a, list) else [a])]


def _deltas(cfg: dict) -> list[float]:
    d = cfg.get("noise", {}).get("delta", list(DEFAULT_DELTAS))
    return [float(v) for v in (d if isinstance(d, list) else [d])]


def _fmt_alpha(a: float) -> str:
    return f"alpha-{a:g}"


# ---------------------------------------------------------------------------
# commands; each writes into ``run_dir`` and returns (status, files)


def cmd_evolve(cfg: dict, es: EigenSystem, u0: SpectralField, alpha: float, run_dir: Path):
    files: list[str] = []
    T = float(cfg["T"])
    times = np.linspace(0.0, T, cfg.get("time_points", 33))
    traj = evolve_trajectory(u0, alpha, times)
    _write(run_dir, "trajectory.csv", traj.to_csv(), files)
    summary = {
        "alpha": alpha,
        "T": T,
        "times": [float(t) for t in times],
        "norms": [float(v) for v in traj.norms],
        "norms_nonincreasing": bool(np.all(np.diff(traj.norms) <= 1e-12 * traj.norms[0])),
        "initial_field": u0.to_dict(),
        "final_field": traj.field(-1).to_dict(),
    }
    _write(run_dir, "summary.json", _dump_json(summary), files)
    return "ok", files


def cmd_backcast(cfg: dict, es: EigenSystem, u0: SpectralField, alpha: float, run_dir: Path):
    """Exact roundtrip plus noisy reconstructions with ``gamma = (delta/R)^2``."""
    files: list[str] = []
    T, R = float(cfg["T"]), float(cfg.get("R", 2.0))
    cap = float(cfg.get("amplification_cap", bc.DEFAULT_CAP))
    seed = int(cfg.get("noise", {}).get("seed", 0))
    K, _ = log_convexity_constant(es, alpha, T)
    if "K" in cfg.get("overrides", {}):
        K = float(cfg["overrides"]["K"])
    times = np.linspace(0.0, T, cfg.get("time_points", 33))
    mid = T / 2.0

    uT = forward_evolve(u0, alpha, T)
    exact = bc.exact_backcast(uT, alpha, T, cap)
    factor = bc.amplification_profile(es, alpha, T)[:, 1]
    keep = np.isfinite(factor) & (factor <= cap)
    diff = exact.u0_hat.coefficients[keep] - u0.coefficients[keep]
    scale = float(np.linalg.norm(u0.coefficients[keep])) or 1.0
    roundtrip = float(np.linalg.norm(diff)) / scale

    u_mid = forward_evolve(u0, alpha, mid)
    traj = evolve_trajectory(u0, alpha, times)
    runs, rows, fits = [], [], {"delta": [], "t0": [], "tmid": []}
    bound_ok: bool | None = None
    for i, delta in enumerate(_deltas(cfg)):
        if delta == 0.0:
            runs.append({"delta": 0.0, "gamma": None, "result": exact.to_dict()})
            continue
        if delta >= R:
            raise DomainError(f"noise level {delta} is not below R = {R}")
        obs = bc.noisy_observation(uT, bc.NoiseSpec(delta, seed + i))
        gamma = bc.choose_gamma(delta, R)
        res = bc.tikhonov_backcast(obs, alpha, T, gamma)
        err0 = (res.u0_hat - u0).norm()
        errm = (bc.backcast_interior(res, alpha, mid) - u_mid).norm()
        d_eff = max(delta, (forward_evolve(res.u0_hat, alpha, T) - uT).norm())
        b0, bm = 2.0 * K * R, 2.0 * K * math.sqrt(R * d_eff)
        rows.append((delta, gamma, err0, errm, b0, bm))
        runs.append({"delta": delta, "gamma": gamma, "result": res.to_dict()})
        fits["delta"].append(delta)
        fits["t0"].append(err0)
        fits["tmid"].append(errm)
        if res.u0_hat.norm() <= R:
            rec = evolve_trajectory(res.u0_hat, alpha, times)
            ok = all(c.passed for c in verify_noisy_holder(traj, rec, K, R, d_eff))
            bound_ok = ok if bound_ok is None else bound_ok and ok

    def rate(key):
        ys = fits[key]
        if len(ys) < 2 or min(ys) <= 0:
            return None
        return bc.fit_power_law(fits["delta"], ys)

    doc = {"alpha": alpha, "T": T, "R": R, "exact": exact.to_dict(), "runs": runs}
    _write(run_dir, "reconstruction.json", _dump_json(doc), files)
    _write(
        run_dir, "errors.csv",
        _csv(["delta", "gamma", "err_t0", "err_tmid", "bound_t0", "bound_tmid"], rows), files,
    )
    summary = {
        "alpha": alpha, "T": T, "R": R, "K": K,
        "roundtrip_error": roundtrip,
        "dropped_modes": exact.dropped_modes,
        "rate_fit": {"t0": rate("t0"), "tmid": rate("tmid")},
        "noisy_bound_passed": bound_ok,
    }
    _write(run_dir, "summary.json", _dump_json(summary), files)
    return "ok", files


def cmd_certify(cfg: dict, es: EigenSystem, u0: SpectralField, alpha: float, run_dir: Path):
    files: list[str] = []
    cert = run_certificate(
        u0, alpha, float(cfg["T"]), float(cfg.get("R", 2.0)), float(cfg.get("epsilon", 1.0)),
        time_points=cfg.get("time_points", 33),
        deltas=tuple(d for d in _deltas(cfg) if d > 0),
        dissipation_steps=cfg.get("dissipation_steps", 512),
        K_override=cfg.get("overrides", {}).get("K"),
    )
    _write(run_dir, "certificate.json", cert.to_json() + "\n", files)
    _write(run_dir, "certificate.txt", cert.render(), files)
    return ("ok" if cert.passed else "failed-checks"), files


def cmd_amplification(cfg: dict, es: EigenSystem, u0: SpectralField, alpha: float, run_dir: Path):
    files: list[str] = []
    T = float(cfg["T"])
    fa = bc.amplification_profile(es, alpha, T)[:, 1]
    f1 = bc.amplification_profile(es, 1.0, T)[:, 1]
    rows = [(str(n), lam, a, b) for n, (lam, a, b) in enumerate(zip(es.eigenvalues, fa, f1), start=1)]
    _write(run_dir, "amplification.csv", _csv(["n", "lambda", "factor_alpha", "factor_1"], rows), files)
    return "ok", files


HANDLERS = {
    "evolve": cmd_evolve,
    "backcast": cmd_backcast,
    "certify": cmd_certify,
    "amplification": cmd_amplification,
}


# ---------------------------------------------------------------------------
# driver


def run(command: str, config: str, out: str | None = None, seed: int | None = None,
        modes: int | None = None) -> int:
    """Execute one subcommand; returns the process exit code."""
    try:
        cfg, base = load_config(config)
        cfg = apply_overrides(cfg, seed, modes)
        es = build_operator(cfg["operator"], base, modes)
        u0 = build_initial(cfg, es, base)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (DomainError, ConvergenceError, OverflowError) as exc:
        log.error("numeric domain error while building the problem: %s", exc)
        return EXIT_DOMAIN

    out_dir = Path(out if out is not None else cfg.get("outputs", "out"))
    out_dir.mkdir(parents=True, exist_ok=True)
    entries, code = [], EXIT_OK
    for alpha in _alphas(cfg):
        run_dir = out_dir / _fmt_alpha(alpha)
        run_dir.mkdir(exist_ok=True)
        log.info("%s: alpha = %g -> %s", command, alpha, run_dir)
        entry = {"alpha": alpha, "directory": run_dir.name}
        try:
            status, files = HANDLERS[command](cfg, es, u0, alpha, run_dir)
        except (DomainError, ConvergenceError, OverflowError) as exc:
            log.error("alpha = %g: %s", alpha, exc)
            status, files = "domain-error", []
            entry["message"] = str(exc)
        entry.update(status=status, files=files)
        entries.append(entry)
        if status == "domain-error":
            code = EXIT_DOMAIN
        elif status == "failed-checks" and code == EXIT_OK:
            code = EXIT_CERT
    index = {"command": command, "config": Path(config).name, "exit_code": code, "runs": entries}
    (out_dir / "index.json").write_text(_dump_json(index))
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracback", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name, help=COMMAND_HELP[name])
        s.add_argument("--config", required=True, help="config JSON path or bundled config name")
        s.add_argument("--out", default=None, help="output directory (default ./out)")
        s.add_argument("--seed", type=int, default=None, help="override noise and random-u0 seeds")
        s.add_argument("--modes", type=int, default=None, help="override the mode truncation")
    return p


def _setup_logging() -> None:
    level = os.environ.get("BACKCAST_LOG", "error").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.ERROR), format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


COMMAND_HELP = {
    "evolve": "forward trajectories and norms on the configured time grid",
    "backcast": "exact roundtrip and Tikhonov reconstructions from noisy final data",
    "certify": "stability certificate with every inequality checked",
    "amplification": "per-mode gain of the backward map for alpha and for alpha = 1",
}


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.modes is not None and args.modes < 1:
        log.error("--modes must be positive")
        return EXIT_CONFIG
    return run(args.command, args.config, args.out, args.seed, args.modes)


if __name__ == "__main__":
    sys.exit(main())
