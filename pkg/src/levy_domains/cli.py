"""Command-line entry point: classify, counterexample, simulate, verify-theorems.

Exit status: 0 on success, 2 when a verdict is Undetermined, 1 on failure.
Every output carries the package version, the seed, a hash of the run
configuration and (unless --no-timestamp) a UTC timestamp.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import ConfigError, LevyDomainsError

EXIT_OK, EXIT_FAIL, EXIT_UNDETERMINED = 0, 1, 2


@dataclasses.dataclass
class RunConfig:
    command: str
    measure: str | None = None
    integrand: str | None = None
    format: str = "json"
    seed: int | None = None
    paths: int | None = None
    checkpoints: list | None = None
    masks: str | None = None
    out: str | None = None
    tilde: bool = False
    dim: int = 1
    emit: str | None = None
    verify: bool = False
    suite: str | None = None
    draws: int | None = None
    workers: int | None = None
    tolerances: dict = dataclasses.field(default_factory=dict)
    timestamp: bool = True

    FIELDS = None  # filled below

    @classmethod
    def from_json_text(cls, text: str, source: str = "<config>") -> "RunConfig":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise ConfigError(f"{source}: config must be a JSON object")
        unknown = set(obj) - set(cls.FIELDS)
        if unknown:
            raise ConfigError(f"{source}: unknown config fields {sorted(unknown)}")
        if "command" not in obj:
            raise ConfigError(f"{source}: missing 'command'")
        return cls(**obj)

    def to_json(self) -> dict:
        return {f: getattr(self, f) for f in self.FIELDS}

    def config_hash(self) -> str:
        d = self.to_json()
        d.pop("timestamp", None)
        return hashlib.sha256(json.dumps(d, sort_keys=True, default=str).encode()).hexdigest()[:16]


RunConfig.FIELDS = tuple(f.name for f in dataclasses.fields(RunConfig))

# tolerance overrides map onto module constants
_TOLERANCES = {"eps_conv": ("classifier", "EPS_CONV"), "scale_bound": ("classifier", "SCALE_BOUND"),
               "k_max": ("classifier", "K_MAX")}


def _apply_tolerances(tols: dict) -> None:
    import importlib
    for key, value in tols.items():
        if key not in _TOLERANCES:
            raise ConfigError(f"unknown tolerance override {key!r}; known: {sorted(_TOLERANCES)}")
        mod, attr = _TOLERANCES[key]
        setattr(importlib.import_module(f"levy_domains.{mod}"), attr, type(getattr(
            importlib.import_module(f"levy_domains.{mod}"), attr))(value))


def _meta(cfg: RunConfig, extra: dict | None = None) -> dict:
    m = {"version": __version__, "seed": cfg.seed, "config_hash": cfg.config_hash()}
    if cfg.timestamp:
        m["timestamp"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if extra:
        m.update(extra)
    return m


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default) + "\n"


def _default(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if hasattr(x, "value"):
        return x.value
    raise TypeError(f"not JSON serializable: {type(x).__name__}")


def _write(text: str, path: str | None, stdout) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _load_measure(path):
    from .core import load_triplet
    if not path:
        raise ConfigError("--measure is required")
    try:
        return load_triplet(path)
    except FileNotFoundError as exc:
        raise ConfigError(f"measure file not found: {path}") from exc


def _integrand(spec):
    from .integrands import parse_integrand
    if not spec:
        raise ConfigError("--integrand is required")
    try:
        return parse_integrand(spec)
    except FileNotFoundError as exc:
        raise ConfigError(f"integrand table not found: {exc.filename}") from exc


# ---------------------------------------------------------------------------
# commands

def cmd_classify(cfg: RunConfig, stdout) -> int:
    from .classifier import CLASSES, classify
    mu = _load_measure(cfg.measure)
    f = _integrand(cfg.integrand)
    v = classify(mu, f, cfg.checkpoints)
    meta = _meta(cfg, {"measure_hash": mu.config_hash(), "integrand": cfg.integrand})
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for k, val in meta.items():
            buf.write(f"# {k}={val}\n")
        w.writerow(["class", "status"])
        for c in CLASSES:
            w.writerow([c, getattr(v, c).value])
        text = buf.getvalue()
    elif cfg.format == "human":
        text = "".join(f"{c:3s} {getattr(v, c).value}\n" for c in CLASSES)
        if v.q is not None:
            text += f"q   {list(v.q)}\n"
    else:
        out = v.to_json()
        out["meta"] = meta
        text = _dump(out)
    _write(text, cfg.out, stdout)
    return EXIT_UNDETERMINED if v.undetermined_only else EXIT_OK


def cmd_counterexample(cfg: RunConfig, stdout, which: str) -> int:
    from . import counterexamples as ce
    if which != "e2":
        raise ConfigError(f"unknown counterexample {which!r}; available: e2")
    if cfg.verify:
        rows = ce.identity_table(cfg.dim)
        if cfg.format == "json":
            text = _dump({"identities": rows, "meta": _meta(cfg)})
        else:
            lines = [f"# version={__version__} config_hash={cfg.config_hash()}"]
            for r in rows:
                exp = "" if r["expected"] is None else f"{r['expected']:.15g}"
                lines.append(f"{'PASS' if r['ok'] else 'FAIL'}  {r['identity']:<34s} "
                             f"value={r['value']:.15g} expected={exp} error={r['error']:.3g}")
            text = "\n".join(lines) + "\n"
        _write(text, cfg.out, stdout)
        return EXIT_OK if all(r["ok"] for r in rows) else EXIT_FAIL
    mu = ce.build_mu_tilde(dim=cfg.dim) if cfg.tilde else ce.build_mu(dim=cfg.dim)
    obj = mu.to_json()
    if cfg.emit:
        _write(_dump(obj), cfg.emit, stdout)
        _write(_dump({"emitted": cfg.emit, "measure_hash": mu.config_hash(), "meta": _meta(cfg)}),
               None, stdout)
    else:
        _write(_dump(obj), cfg.out, stdout)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, stdout) -> int:
    from .simulator import monte_carlo
    mu = _load_measure(cfg.measure)
    f = _integrand(cfg.integrand)
    if not cfg.checkpoints:
        raise ConfigError("--checkpoints is required")
    seed = 0 if cfg.seed is None else cfg.seed
    res = monte_carlo(mu, f, cfg.masks, cfg.checkpoints, n_paths=cfg.paths or 1000, seed=seed,
                      workers=cfg.workers)
    meta = _meta(cfg, {"measure_hash": mu.config_hash(), "paths": res.n_paths,
                       "truncation_bound": res.truncation_bound})
    if res.surrogate:
        meta["surrogate"] = res.surrogate
    if cfg.format == "json":
        rows = [dict(zip(("t", "mask", "mean", "std", "ci_lo", "ci_hi", "gamma_t"), r))
                for r in res.rows()]
        text = _dump({"rows": rows, "meta": meta})
    else:
        buf = io.StringIO()
        for k, val in meta.items():
            buf.write(f"# {k}={val if isinstance(val, str) else json.dumps(val, sort_keys=True)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "mask", "mean", "std", "ci_lo", "ci_hi", "gamma_t"])
        for r in res.rows():
            w.writerow([repr(x) if isinstance(x, float) else x for x in r])
        text = buf.getvalue()
    _write(text, cfg.out, stdout)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, stdout) -> int:
    from . import suites
    names = list(suites.SUITES) if cfg.suite in (None, "all") else [cfg.suite]
    reports = []
    for name in names:
        if name not in suites.SUITES:
            raise ConfigError(f"unknown suite {name!r}; available: {sorted(suites.SUITES)} or all")
        seed = 7 if cfg.seed is None else cfg.seed
        if name == "monotonicity":
            reports.append(suites.monotonicity_suite(cfg.draws or 200, seed))
        else:
            reports.append(suites.log_moment_suite(cfg.draws or 50, seed))
    if cfg.format == "json":
        text = _dump({"suites": [r.to_json() for r in reports], "meta": _meta(cfg)})
    else:
        text = f"# version={__version__} seed={cfg.seed} config_hash={cfg.config_hash()}\n"
        for r in reports:
            text += f"[{r.name}] draws={r.draws}\n" + "\n".join(r.lines()) + "\n"
    _write(text, cfg.out, stdout)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parsing

def _checkpoints(text: str) -> list:
    try:
        ts = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad checkpoint list {text!r}") from exc
    if not ts or any(t <= 0 for t in ts):
        raise argparse.ArgumentTypeError("checkpoints must be positive")
    return sorted(ts)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="levy-domains", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--config", help="JSON RunConfig file; command-line flags override it")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help=f"tolerance override ({', '.join(sorted(_TOLERANCES))})")
    sub = p.add_subparsers(dest="command")

    def fmt(sp, default="json"):
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--json", dest="format", action="store_const", const="json")
        g.add_argument("--csv", dest="format", nargs="?", const="csv", default=None,
                       metavar="OUT", help="CSV output, optionally to a file")
        g.add_argument("--human", dest="format", action="store_const", const="human")
        sp.set_defaults(format=None, default_format=default)

    c = sub.add_parser("classify", help="membership in D0, D, Dc, De")
    c.add_argument("--measure")
    c.add_argument("--integrand")
    c.add_argument("--checkpoints", type=_checkpoints)
    c.add_argument("--out")
    fmt(c)

    e = sub.add_parser("counterexample", help="emit or verify the block counterexample")
    e.add_argument("which", choices=["e2"])
    e.add_argument("--tilde", action="store_true")
    e.add_argument("--dim", type=int, default=1)
    e.add_argument("--emit")
    e.add_argument("--verify", action="store_true")
    e.add_argument("--out")
    fmt(e, "human")

    s = sub.add_parser("simulate", help="Monte Carlo of the integral process")
    s.add_argument("--measure")
    s.add_argument("--integrand")
    s.add_argument("--paths", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--checkpoints", type=_checkpoints)
    s.add_argument("--masks", choices=["from-h"])
    s.add_argument("--workers", type=int)
    s.add_argument("--out")
    fmt(s, "csv")

    v = sub.add_parser("verify-theorems", help="randomized inclusion suites")
    v.add_argument("--suite", default="all")
    v.add_argument("--draws", type=int)
    v.add_argument("--seed", type=int)
    v.add_argument("--out")
    fmt(v, "human")
    return p


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    base = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                base = RunConfig.from_json_text(fh.read(), ns.config).to_json()
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {ns.config}") from exc
    command = ns.command or base.get("command")
    if not command:
        raise ConfigError("no command given")
    if base and base.get("command") != command:
        raise ConfigError(f"config is for {base.get('command')!r}, not {command!r}")
    vals = dict(base, command=command)
    for key in ("measure", "integrand", "seed", "paths", "checkpoints", "masks", "out", "emit",
                "suite", "draws", "workers"):
        v = getattr(ns, key, None)
        if v is not None:
            vals[key] = v
    for key in ("tilde", "verify"):
        if getattr(ns, key, False):
            vals[key] = True
    if getattr(ns, "dim", None) not in (None, 1):
        vals["dim"] = ns.dim
    fmt = getattr(ns, "format", None)
    if fmt not in (None, "json", "csv", "human"):
        vals["out"], fmt = fmt, "csv"      # --csv OUT
    vals["format"] = fmt or base.get("format") or getattr(ns, "default_format", "json")
    tols = dict(base.get("tolerances", {}))
    for item in ns.tol:
        k, sep, val = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol expects NAME=VALUE, got {item!r}")
        tols[k] = float(val)
    vals["tolerances"] = tols
    if ns.no_timestamp:
        vals["timestamp"] = False
    return RunConfig(**vals)


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    _apply_tolerances(cfg.tolerances)
    if cfg.command == "classify":
        return cmd_classify(cfg, stdout)
    if cfg.command == "counterexample":
        return cmd_counterexample(cfg, stdout, "e2")
    if cfg.command == "simulate":
        return cmd_simulate(cfg, stdout)
    if cfg.command == "verify-theorems":
        return cmd_verify(cfg, stdout)
    raise ConfigError(f"unknown command {cfg.command!r}")


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = config_from_args(ns)
        return run(cfg)
    except (LevyDomainsError, OSError) as exc:
        print(f"levy-domains: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
