"""Command-line entry point, TOML configuration and result files.

Every output file carries the digest of the parsed configuration and the
package version.  Outputs contain no timestamps, so one config and seed
always produce byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AdsDnError, ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = [
    "ExperimentConfig",
    "DnTableConfig",
    "InvertConfig",
    "PdeRunConfig",
    "ResidueConfig",
    "load_config",
    "parse_config",
    "config_digest",
    "cmd_dn_table",
    "cmd_invert",
    "cmd_pde_run",
    "cmd_residue",
    "cmd_selftest",
    "main",
]

SCHEMA_VERSION = 1


# ---------------------------------------------------------------------------
# Configuration schema


@dataclass
class DnTableConfig:
    nu: complex = 0.3 + 0j
    d: int = 1
    methods: list = field(default_factory=lambda: ["closed_form", "ode_oracle"])
    modes: list = field(default_factory=list)  # [tau, eta] pairs
    epsilon: float = 1e-3
    a_taylor: list = field(default_factory=list)  # a_1, a_2, ... added to the mode symbol
    c_taylor: list = field(default_factory=list)
    even: bool = True
    expansion_order: int = 2


@dataclass
class InvertConfig:
    nu: complex = 0.3 + 0j
    amplitude: float = 1e-2
    a2_constant: float = 2.0
    a2_slope: float = 1.0
    eta_min: float = 1.0
    eta_max: float = 10.0
    n_modes: int = 12
    background_offset: float = 1.0
    max_order: int = 2
    depth: int = 6
    iterations: int = 4
    even: bool = True
    noise: float = 0.0


@dataclass
class PdeRunConfig:
    nu: float = 0.3
    nodes: int = 4096
    x_max: float = 20.0
    cfl: float = 0.5
    t_end: float = 16.0
    pulse_t0: float = 4.0
    pulse_sigma: float = 0.4
    refine: bool = False
    snapshot_stride: int = 0


@dataclass
class ResidueConfig:
    k: list = field(default_factory=lambda: [1, 2])
    a: list = field(default_factory=lambda: [1.0, 3.0])
    delta: float = 1e-3


@dataclass
class ExperimentConfig:
    schema_version: int = SCHEMA_VERSION
    seed: int = 0
    dn_table: DnTableConfig = field(default_factory=DnTableConfig)
    invert: InvertConfig = field(default_factory=InvertConfig)
    pde_run: PdeRunConfig = field(default_factory=PdeRunConfig)
    residue: ResidueConfig = field(default_factory=ResidueConfig)


_SECTIONS = {
    "dn_table": DnTableConfig,
    "invert": InvertConfig,
    "pde_run": PdeRunConfig,
    "residue": ResidueConfig,
}


def _line_of(text: str, key: str, section: str | None) -> int | None:
    """1-based line of ``key`` inside ``[section]`` (top level when None)."""
    current = None
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line.strip("[]").strip()
            continue
        if current == section and line.split("=", 1)[0].strip() == key:
            return n
    for n, raw in enumerate(text.splitlines(), 1):
        if raw.strip().strip("[]").strip() == key:
            return n
    return None


def _where(text, key, section):
    n = _line_of(text, key, section)
    return f"line {n}: " if n else ""


def _as_complex(v, where):
    if isinstance(v, bool):
        raise ConfigError(f"{where}expected a number")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(t, (int, float)) for t in v):
        return complex(v[0], v[1])
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError:
            pass
    raise ConfigError(f"{where}expected a number or [re, im], got {v!r}")


def _coerce(value, default, where):
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{where}expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}expected a number, got {value!r}")
        return float(value)
    if isinstance(default, complex):
        return _as_complex(value, where)
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{where}expected a list, got {value!r}")
        return value
    return value


def _build_section(cls, raw: dict, text: str, name: str):
    obj = cls()
    known = {f.name: f for f in dataclasses.fields(cls)}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"{_where(text, key, name)}unknown key '{key}' in [{name}]")
        setattr(obj, key, _coerce(value, getattr(obj, key), _where(text, key, name) + f"[{name}].{key}: "))
    return obj


def parse_config(text: str) -> ExperimentConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML syntax: {exc}") from exc
    cfg = ExperimentConfig()
    for key, value in raw.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"{_where(text, key, None)}'{key}' must be a table")
            setattr(cfg, key, _build_section(_SECTIONS[key], value, text, key))
        elif key in ("schema_version", "seed"):
            setattr(cfg, key, _coerce(value, 0, _where(text, key, None) + f"{key}: "))
        else:
            raise ConfigError(f"{_where(text, key, None)}unknown top-level key '{key}'")
    if cfg.schema_version != SCHEMA_VERSION:
        raise ConfigError(f"{_where(text, 'schema_version', None)}schema_version {cfg.schema_version} not supported (expected {SCHEMA_VERSION})")
    _validate(cfg, text)
    return cfg


def _validate(cfg: ExperimentConfig, text: str):
    from .scatter import METHODS

    dt = cfg.dn_table
    for m in dt.methods:
        if m not in ("closed_form", "ode_oracle", "expansion"):
            raise ConfigError(f"{_where(text, 'methods', 'dn_table')}unknown method '{m}'")
    for i, mode in enumerate(dt.modes):
        if not (isinstance(mode, list) and len(mode) == 2 and all(isinstance(v, (int, float)) for v in mode)):
            raise ConfigError(f"{_where(text, 'modes', 'dn_table')}mode {i} must be [tau, eta]")
    if f"expansion_order_{dt.expansion_order}" not in METHODS:
        raise ConfigError(f"{_where(text, 'expansion_order', 'dn_table')}expansion_order out of range")
    dt.a_taylor = [_as_complex(v, "[dn_table].a_taylor: ") for v in dt.a_taylor]
    dt.c_taylor = [_as_complex(v, "[dn_table].c_taylor: ") for v in dt.c_taylor]
    for k in cfg.residue.k:
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ConfigError(f"{_where(text, 'k', 'residue')}k must be positive integers")
    cfg.residue.a = [_as_complex(v, "[residue].a: ") for v in cfg.residue.a]
    if cfg.invert.n_modes < 1:
        raise ConfigError(f"{_where(text, 'n_modes', 'invert')}n_modes must be positive")
    if cfg.pde_run.nodes < 8:
        raise ConfigError(f"{_where(text, 'nodes', 'pde_run')}nodes must be at least 8")


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config(text)


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.complexfloating):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def config_digest(cfg: ExperimentConfig) -> str:
    blob = json.dumps(_jsonable(dataclasses.asdict(cfg)), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Output


class Writer:
    """Collects output files in memory; ``flush`` writes them all at once so
    a failing command leaves no partial output behind."""

    def __init__(self, out_dir, cfg: ExperimentConfig):
        self.out = Path(out_dir)
        self.digest = config_digest(cfg)
        self.files: dict[str, str] = {}

    def csv(self, name: str, header: list, rows) -> None:
        buf = io.StringIO()
        buf.write(f"# config_digest={self.digest}\n# version={__version__}\n")
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
        self.files[name] = buf.getvalue()

    def plot(self, name: str, x, y) -> None:
        lines = [f"# config_digest={self.digest}", f"# version={__version__}"]
        lines += [f"{float(a)!r} {float(b)!r}" for a, b in zip(x, y)]
        self.files[name] = "\n".join(lines) + "\n"

    def json(self, name: str, payload: dict) -> None:
        body = {"config_digest": self.digest, "version": __version__, **payload}
        self.files[name] = json.dumps(_jsonable(body), sort_keys=True, indent=2) + "\n"

    def flush(self) -> list:
        self.out.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(self.files.items()):
            (self.out / name).write_text(text)
        return sorted(self.files)


def _map(fn, items, jobs: int):
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


# ---------------------------------------------------------------------------
# Commands


def _dn_row(args):
    from .model import ModeModel
    from .oracle import ode_dn
    from .scatter import dn_expansion, dn_product, mode_symbol

    dt, tau, eta = args
    a0 = mode_symbol(tau, eta, dt.epsilon)
    out = {}
    if "closed_form" in dt.methods:
        out["closed_form"] = (dn_product(dt.nu, a0), 0.0)
    model = ModeModel(dt.nu, (a0, *dt.a_taylor), tuple(dt.c_taylor), dt.d, even=dt.even)
    if "ode_oracle" in dt.methods:
        r = ode_dn(model)
        out["ode_oracle"] = (r.lam, r.err)
    if "expansion" in dt.methods:
        ex = dn_expansion(model, dt.expansion_order)
        out[f"expansion_order_{dt.expansion_order}"] = (ex.partial_sum(), abs(ex[-1]))
    return out


def cmd_dn_table(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> list:
    from .model import check_mass

    dt = cfg.dn_table
    check_mass(dt.nu)
    modes = [(float(t), float(e)) for t, e in dt.modes]
    rows = _map(_dn_row, [(dt, t, e) for t, e in modes], jobs)
    methods = []
    for r in rows[:1]:
        methods = list(r)
    if not rows:
        methods = [m if m != "expansion" else f"expansion_order_{dt.expansion_order}" for m in dt.methods]
    compare = "closed_form" in methods and "ode_oracle" in methods
    header = ["tau", "eta"] + [f"{p}_{m}" for m in methods for p in ("re", "im", "err")]
    if compare:
        header.append("rel_diff_closed_vs_oracle")
    body = []
    for (t, e), r in zip(modes, rows):
        line = [t, e]
        for m in methods:
            lam, err = r[m]
            line += [float(complex(lam).real), float(complex(lam).imag), float(err)]
        if compare:
            c, o = complex(r["closed_form"][0]), complex(r["ode_oracle"][0])
            line.append(abs(c - o) / abs(c))
        body.append(line)
    w = Writer(out_dir, cfg)
    w.csv("dn_table.csv", header, body)
    w.json(
        "dn_table.json",
        {
            "command": "dn-table",
            "config": dataclasses.asdict(dt),
            "methods": methods,
            "rows": [
                {"tau": t, "eta": e, **{m: {"lam": complex(r[m][0]), "err": r[m][1]} for m in methods}}
                for (t, e), r in zip(modes, rows)
            ],
        },
    )
    return w.flush()


def _oracle_lam(args):
    from .model import ModeModel
    from .oracle import ode_dn

    nu, a0, a2 = args
    r = ode_dn(ModeModel(nu, (a0, 0, a2)))
    return r.lam, r.err


def cmd_invert(cfg: ExperimentConfig, out_dir, jobs: int = 1, seed: int | None = None) -> list:
    from .inverse import InversionProblem, eta_norm2, layer_strip
    from .model import check_mass
    from .scatter import DNRow, DNTable

    ic = cfg.invert
    nu = check_mass(ic.nu)
    seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    etas = np.geomspace(ic.eta_min, ic.eta_max, ic.n_modes)
    truth = [ic.amplitude * (ic.a2_constant + ic.a2_slope * e * e) for e in etas]
    a0s = [e * e + ic.background_offset for e in etas]
    data = _map(_oracle_lam, [(nu, a0, a2) for a0, a2 in zip(a0s, truth)], jobs)
    table = DNTable()
    for e, (lam, err) in zip(etas, data):
        if ic.noise:
            lam = lam * (1 + ic.noise * (rng.normal() + 1j * rng.normal()))
        table.add(DNRow(0.0, float(e), lam, "ode_oracle", err))
    off = ic.background_offset
    problem = InversionProblem(
        nu,
        table,
        background=lambda tau, eta: eta_norm2(eta) - tau * tau + off,
        max_order=ic.max_order,
        even=ic.even,
        depth=ic.depth,
        iterations=ic.iterations,
    )
    rep = layer_strip(problem)
    fit = rep.fits.get(2)
    expected = [ic.amplitude * ic.a2_constant, ic.amplitude * ic.a2_slope]
    rel = [abs(complex(f) - x) / abs(x) if x else abs(complex(f)) for f, x in zip(fit or [], expected)]
    w = Writer(out_dir, cfg)
    orders = sorted(rep.coefficients)
    header = ["eta"] + [f"{p}_a{N}" for N in orders for p in ("re", "im")]
    body = []
    for i, e in enumerate(etas):
        line = [float(e)]
        for N in orders:
            v = complex(rep.coefficients[N][i])
            line += [v.real, v.imag]
        body.append(line)
    w.csv("coefficients.csv", header, body)
    for N in orders:
        w.plot(f"a{N}_vs_eta2.dat", etas**2, [complex(v).real for v in rep.coefficients[N]])
    w.json(
        "invert_report.json",
        {
            "command": "invert",
            "seed": seed,
            "config": dataclasses.asdict(ic),
            "report": rep.to_dict(),
            "truth_fit_a2": expected,
            "relative_error_fit_a2": rel,
        },
    )
    return w.flush()


def cmd_pde_run(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> list:
    from .pde_sim import GridConfig, gaussian_pulse, neumann_error, run_forward, save_snapshots_csv

    pc = cfg.pde_run
    grid = GridConfig(pc.nodes, pc.x_max, pc.cfl, 0.0, pc.t_end, pc.snapshot_stride)
    pulse = gaussian_pulse(pc.pulse_t0, pc.pulse_sigma)
    rec = run_forward(pc.nu, pulse, grid)
    up, ref, err = neumann_error(rec)
    report = {"command": "pde-run", "config": dataclasses.asdict(pc), "relative_l2_error": err}
    if pc.refine:
        fine = GridConfig(2 * pc.nodes, pc.x_max, pc.cfl, 0.0, pc.t_end)
        err_fine = neumann_error(run_forward(pc.nu, pulse, fine))[2]
        report["relative_l2_error_refined"] = err_fine
        report["error_ratio"] = err / err_fine
    w = Writer(out_dir, cfg)
    w.csv("neumann.csv", ["t", "u_plus", "reference"], zip(rec.t, up, ref))
    w.plot("neumann.dat", rec.t, up)
    w.plot("reference.dat", rec.t, ref)
    if pc.snapshot_stride:
        rows = [(t, x, v) for t, wv in rec.snapshots for x, v in zip(rec.field.x, wv)]
        w.csv("snapshots.csv", ["t", "x", "w"], rows)
    w.json("pde_report.json", report)
    return w.flush()


def cmd_residue(cfg: ExperimentConfig, out_dir, jobs: int = 1) -> list:
    from .scatter import conformal_residue
    from .specfun import principal_power

    rc = cfg.residue
    rows, entries = [], []
    for k in rc.k:
        for a in rc.a:
            val = conformal_residue(k, a, rc.delta)
            ak = principal_power(a, k)
            rel = abs(val - ak) / abs(ak)
            rows.append([k, a.real, a.imag, val.real, val.imag, rel])
            entries.append({"k": k, "a": a, "residue": val, "a_pow_k": ak, "relative_error": rel})
    w = Writer(out_dir, cfg)
    w.csv("residue.csv", ["k", "re_a", "im_a", "re_residue", "im_residue", "rel_err_vs_a_pow_k"], rows)
    w.json("residue.json", {"command": "residue", "config": dataclasses.asdict(rc), "identity_check": entries})
    return w.flush()


def cmd_selftest(cfg: ExperimentConfig, out_dir, seed: int | None = None) -> tuple[list, bool]:
    from .invariants import run_suite

    seed = cfg.seed if seed is None else seed
    checks = run_suite(seed)
    ok = all(c.passed for c in checks)
    w = Writer(out_dir, cfg)
    w.json(
        "selftest.json",
        {"command": "selftest", "seed": seed, "passed": ok, "checks": [c.to_dict() for c in checks]},
    )
    return w.flush(), ok


# ---------------------------------------------------------------------------
# argparse front end


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="adsdn", description="DN maps, transforms and layer stripping on the half-line.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML configuration file")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for per-mode work")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("dn-table", "invert", "pde-run", "residue", "selftest"):
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg.seed = args.seed
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if args.command == "dn-table":
            files = cmd_dn_table(cfg, args.out, args.jobs)
        elif args.command == "invert":
            files = cmd_invert(cfg, args.out, args.jobs)
        elif args.command == "pde-run":
            files = cmd_pde_run(cfg, args.out, args.jobs)
        elif args.command == "residue":
            files = cmd_residue(cfg, args.out, args.jobs)
        else:
            files, ok = cmd_selftest(cfg, args.out)
            for f in files:
                print(args.out / f)
            if not ok:
                print("selftest: invariant failures, see selftest.json", file=sys.stderr)
                return 3
            return 0
    except AdsDnError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"invalid parameter: {exc}", file=sys.stderr)
        return 2
    for f in files:
        print(args.out / f)
    return 0


if __name__ == "__main__":
    sys.exit(main())
