"""Command-line driver: ``spiked-rmt {phase,law,verify,sample,compare,transition}``.

Every subcommand reads an optional INI config (``--config``); command-line
flags override config values.  Exit codes: 0 success, 1 a check failed,
2 invalid configuration or input.
"""

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import laws
from .errors import NumericalError, SpikedRMTError, ValidationError
from .finite import (
    brute_force_expectation,
    build_basis,
    expectation_rank_m_direct,
    expectation_rank_m_identity,
)
from .phase import Potential, phase_portrait, solve_equilibrium
from .regimes import REGIMES, plan_regime
from .sampler import (
    export_csv,
    ks_distance,
    rescale,
    sample_gaussian_spiked,
    sample_general_mcmc,
    save_batch,
)

log = logging.getLogger("spiked_rmt")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

LAW_NAMES = ("tw", "tw_j", "f1", "fk", "gk", "gk_j", "normal")


class ConfigError(Exception):
    """Malformed or incomplete configuration."""


# ---------------------------------------------------------------- config


def _floats(text):
    text = str(text).strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.replace(";", ",").split(","))


class Config:
    """Thin wrapper over :class:`configparser.ConfigParser` with typed getters."""

    def __init__(self, path=None):
        self.parser = configparser.ConfigParser()
        if path is not None:
            with open(path, encoding="utf-8") as fh:
                self.parser.read_file(fh)

    def get(self, section, key, default=None):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key)
        return default

    def number(self, section, key, default=None, kind=float):
        raw = self.get(section, key)
        if raw is None:
            if default is None:
                raise ConfigError(f"missing [{section}] {key}")
            return default
        try:
            return kind(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}") from exc

    def numbers(self, section, key, default=()):
        raw = self.get(section, key)
        if raw is None:
            return tuple(default)
        try:
            return _floats(raw)
        except ValueError as exc:
            raise ConfigError(f"[{section}] {key}: {exc}") from exc

    def set_default(self, section, key, value):
        if value is None:
            return
        if not self.parser.has_section(section):
            self.parser.add_section(section)
        self.parser.set(section, key, str(value))


def load_potential(cfg):
    name = cfg.get("potential", "name", "gaussian").strip().lower()
    coef = cfg.numbers("potential", "coefficients")
    if coef:
        return Potential(coef, name=name if name != "gaussian" else "custom")
    if name == "gaussian":
        return Potential.gaussian()
    if name == "quartic":
        return Potential.quartic()
    raise ConfigError(f"unknown potential {name!r}; give coefficients")


def _grid(cfg, default=(-6.0, 4.0, 0.1)):
    lo, hi, step = cfg.numbers("law", "grid", default) or default
    if not step > 0 or not hi > lo:
        raise ConfigError("grid must be lo, hi, step with hi > lo and step > 0")
    count = int(round((hi - lo) / step)) + 1
    return np.round(lo + step * np.arange(count), 12)


def _out_dir(cfg):
    path = Path(cfg.get("output", "dir", "."))
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path, data):
    text = json.dumps(data, indent=2, default=float)
    Path(path).write_text(text + "\n", encoding="utf-8")
    return text


# ---------------------------------------------------------------- commands


def cmd_phase(cfg):
    """Equilibrium quantities, critical value and outlier locations as JSON."""
    eq = solve_equilibrium(load_potential(cfg))
    a_max = cfg.number("phase", "a_max", 0.0)
    rng = None if a_max == 0.0 else (cfg.number("phase", "a_min"), a_max)
    portrait = phase_portrait(eq, rng, grid=cfg.number("phase", "scan_points", 60, int))
    a_grid = cfg.numbers("phase", "x0_grid") or tuple(portrait.a_c * np.array([1.25, 1.5, 2.0, 3.0]))
    report = portrait.to_dict(a_grid)
    text = _write_json(_out_dir(cfg) / "phase.json", report)
    print(text)
    return EXIT_OK


def _law_values(cfg, name, grid):
    alphas = cfg.numbers("law", "alphas")
    j = cfg.number("law", "j", 1, int)
    s = complex(cfg.get("law", "s", "1").replace(" ", "").replace("i", "j"))
    if name == "normal":
        return laws.normal_cdf(grid)
    if name == "tw":
        return np.array([np.real(laws.fredholm_tw(t, s, check=False)) for t in grid])
    if name == "tw_j":
        return np.array([laws.tw_jth(t, j) for t in grid])
    if name == "f1":
        alpha = alphas[0] if alphas else 0.0
        return np.array([np.real(laws.f1(t, alpha, s)) for t in grid])
    if name == "fk":
        return laws.law_curve("fk", grid, alphas or (0.0,), j=j).values
    if name == "gk":
        return np.array([np.real(laws.gk(t, alphas or (0.0,), s)) for t in grid])
    if name == "gk_j":
        k = cfg.number("law", "k", len(alphas) or 1, int)
        use = alphas if alphas and any(alphas) else None
        return np.array([laws.gk_jth(t, j, k, use) for t in grid])
    raise ConfigError(f"law must be one of {LAW_NAMES}")


def cmd_law(cfg):
    """Tabulate one or more laws to ``<dir>/<law>.csv``."""
    names = [v.strip() for v in cfg.get("law", "name", "tw").split(",") if v.strip()]
    grid = _grid(cfg)
    out = _out_dir(cfg)
    for name in names:
        if name not in LAW_NAMES:
            raise ConfigError(f"law must be one of {LAW_NAMES}")
        curve = laws.LawCurve(name, {}, grid, np.asarray(_law_values(cfg, name, grid), dtype=float))
        path = out / f"{name}.csv"
        curve.to_csv(path)
        print(f"wrote {path} ({grid.size} rows)")
    return EXIT_OK


VERIFY_CASES = (
    # (potential, d, spikes, E lower end, s)
    ("gaussian", 3, (0.5, 0.9), 1.5, 1.0),
    ("gaussian", 4, (0.5, 0.9), 1.5, 0.6),
    ("gaussian", 3, (0.4, 1.1), 1.0, 1 + 0.2j),
    ("quartic", 3, (0.4, 0.8), None, 1.0),
)


def run_verify_suite(cases=VERIFY_CASES, tol=1e-6, brute=True):
    """Identity vs direct (and brute force for ``d <= 3``); returns per-case rows."""
    rows = []
    for pot_name, d, spikes, lower, s in cases:
        pot = Potential.gaussian() if pot_name == "gaussian" else Potential.quartic()
        if lower is None:
            lower = solve_equilibrium(pot).right + 0.2
        basis = build_basis(pot, d, d)
        direct = expectation_rank_m_direct(basis, d, spikes, lower, s)
        ident = expectation_rank_m_identity(basis, d, spikes, lower, s)
        scale = 1 + abs(direct)
        row = {
            "potential": pot_name, "d": d, "spikes": list(spikes), "E": lower,
            "s": str(s), "direct": str(direct), "identity_residual": abs(ident - direct) / scale,
        }
        if brute and d <= 3:
            bf = brute_force_expectation(pot, d, spikes, lower, s, d)
            row["brute_force_residual"] = abs(bf - direct)
        row["pass"] = bool(row["identity_residual"] < tol and row.get("brute_force_residual", 0.0) < tol)
        rows.append(row)
    return rows


def cmd_verify(cfg):
    cases = VERIFY_CASES
    spikes = cfg.numbers("verify", "spikes")
    if spikes:
        d = cfg.number("verify", "d", 3, int)
        lower = cfg.number("verify", "E", 1.5)
        s_values = [complex(v.strip().replace("i", "j")) for v in cfg.get("verify", "s", "1").split(",")]
        cases = tuple(("gaussian", d, spikes, lower, s) for s in s_values)
    rows = run_verify_suite(cases, tol=cfg.number("verify", "tol", 1e-6))
    worst = max(max(r["identity_residual"], r.get("brute_force_residual", 0.0)) for r in rows)
    for r in rows:
        print(json.dumps(r))
    ok = all(r["pass"] for r in rows)
    print(f"{'PASS' if ok else 'FAIL'} worst residual {worst:.3e}")
    _write_json(_out_dir(cfg) / "verify.json", {"cases": rows, "worst": worst, "pass": ok})
    return EXIT_OK if ok else EXIT_FAIL


def _plan(cfg, eq):
    regime = cfg.get("spikes", "regime", "")
    n = cfg.number("run", "n", 200, int)
    if not regime:
        return None, n
    if regime not in REGIMES:
        raise ConfigError(f"regime must be one of {REGIMES}")
    a = cfg.get("spikes", "a")
    plan = plan_regime(
        eq, regime, n,
        a=None if a is None else float(a),
        alphas=cfg.numbers("spikes", "alphas"),
        m=cfg.number("spikes", "m", 1, int),
        spikes=cfg.numbers("spikes", "values"),
    )
    return plan, n


def _sample(cfg, pot, spikes, n, keep=None):
    trials = cfg.number("run", "trials", 1000, int)
    seed = cfg.number("run", "seed", 0, int)
    if pot.is_gaussian:
        workers = cfg.number("run", "workers", 1, int)
        return sample_gaussian_spiked(n, spikes, trials, seed, keep=keep, workers=workers)
    steps = cfg.number("run", "steps", 4 * trials, int)
    return sample_general_mcmc(pot, n, spikes, trials, steps, seed)


def cmd_sample(cfg):
    pot = load_potential(cfg)
    plan, n = _plan(cfg, solve_equilibrium(pot))
    spikes = plan.spikes if plan else cfg.numbers("spikes", "values")
    keep = cfg.get("run", "keep")
    batch = _sample(cfg, pot, spikes, n, None if keep is None else int(keep))
    out = _out_dir(cfg)
    save_batch(batch, out / "samples.bin")
    if cfg.get("output", "csv", "no").lower() in ("1", "yes", "true"):
        export_csv(batch, out / "samples.csv")
    print(json.dumps({"n": n, "spikes": list(spikes), "trials": batch.trials, "method": batch.method,
                      "file": str(out / "samples.bin")}))
    return EXIT_OK


def cmd_compare(cfg):
    """Sample a regime, rescale, and compare with the predicted law."""
    pot = load_potential(cfg)
    eq = solve_equilibrium(pot)
    plan, n = _plan(cfg, eq)
    if plan is None:
        raise ConfigError("compare needs [spikes] regime")
    ks_list = [int(v) for v in cfg.numbers("compare", "k", (1,))]
    batch = _sample(cfg, pot, plan.spikes, n, keep=max(ks_list) if pot.is_gaussian else None)
    out = _out_dir(cfg)
    report = {"regime": plan.regime, "n": n, "spikes": list(plan.spikes), "meta": plan.meta, "statistics": []}
    for k in ks_list:
        st = plan.statistic(k)
        stat = rescale(batch, k, st.mode, st.center, curvature=st.curvature, beta=st.beta)
        cdf = st.law()
        dist = ks_distance(stat.values, cdf)
        grid = np.sort(stat.values)
        emp = np.arange(1, grid.size + 1) / grid.size
        data = np.column_stack([grid, emp, cdf(grid)])
        np.savetxt(out / f"compare_k{k}.csv", data, delimiter=",", header="T,empirical,predicted",
                   comments="", fmt="%.17g")
        report["statistics"].append({"k": k, "ks": dist, "law": st.description, "mode": st.mode})
        print(f"k={k} {st.description}: KS = {dist:.4f}")
    tol = cfg.get("compare", "tol")
    ok = tol is None or all(r["ks"] < float(tol) for r in report["statistics"])
    report["pass"] = ok
    _write_json(out / "compare.json", report)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_transition(cfg):
    eq = solve_equilibrium(load_potential(cfg))
    plan, n = _plan(cfg, eq)
    if plan is None or plan.regime not in ("secondary-critical", "critical-jump"):
        raise ConfigError("transition needs regime secondary-critical or critical-jump")
    report = {"regime": plan.regime, "n": n, "spikes": list(plan.spikes), **plan.meta}
    report["transition"] = json.loads(plan.meta["transition"])
    print(_write_json(_out_dir(cfg) / "transition.json", report))
    return EXIT_OK


COMMANDS = {
    "phase": cmd_phase,
    "law": cmd_law,
    "verify": cmd_verify,
    "sample": cmd_sample,
    "compare": cmd_compare,
    "transition": cmd_transition,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="spiked-rmt", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("-c", "--config", help="INI configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--trials", type=int)
        if name == "law":
            p.add_argument("--law", help=f"comma-separated subset of {LAW_NAMES}")
            p.add_argument("--grid", help="lo,hi,step")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        cfg = Config(args.config)
        cfg.set_default("output", "dir", args.out)
        cfg.set_default("run", "seed", args.seed)
        cfg.set_default("run", "n", args.n)
        cfg.set_default("run", "trials", args.trials)
        if args.command == "law":
            cfg.set_default("law", "name", args.law)
            cfg.set_default("law", "grid", args.grid)
        return COMMANDS[args.command](cfg)
    except (ConfigError, configparser.Error, ValidationError, OSError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, SpikedRMTError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
