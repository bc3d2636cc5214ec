"""Command-line driver: ``spinamp run | sweep | verify``.

Exit codes: 0 success, 1 invalid configuration, 2 computation error,
3 verification failure. The default output directory comes from
``$SPINAMP_OUTPUT_DIR`` (``./spinamp-output`` if unset).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import hamiltonians as ham
from .propagate import ExpParams
from .protocols import (
    DEFAULT_THRESHOLD,
    MAP_ORDERS,
    MODES,
    SCHEMES,
    MapParams,
    ProtocolSpec,
    TraceResult,
    fit_log_scaling,
    placement_index,
    run_both_branches,
    run_random_map,
    run_sweep,
)
from .statevec import MAX_QUBITS
from . import verify as verify_mod

log = logging.getLogger("spinamp")

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_VERIFY = 0, 1, 2, 3
OUTPUT_ENV = "SPINAMP_OUTPUT_DIR"
TRACE_HEADER = ["r", "Mz0", "Mz1", "contrast", "Q0", "Q1", "fidelity"]
SWEEP_HEADER = ["n", "N", "r_star", "contrast_sat", "Q_sat", "fidelity_sat"]


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RunConfig:
    """Everything needed to reproduce a run; round-trips through JSON."""

    command: str = "run"
    scheme: str = "random-map"
    n: list = field(default_factory=lambda: [4])
    target: int = 1
    mode: str = "reduced"
    first: str = "end"
    t_pert: float = 0.5
    t_free: float = float(np.pi / np.sqrt(2))
    r_max: int = 60
    threshold: float = DEFAULT_THRESHOLD
    b12: float = 1.0
    decay_exponent: float = 3.0
    map_order: str = "dip-first"
    method: Optional[str] = None
    tolerance: float = 1e-10
    krylov_dim: int = 30
    workers: int = 1
    output_dir: str = ""
    plot_script: bool = False

    def validate(self) -> "RunConfig":
        if self.command not in ("run", "sweep"):
            raise ConfigError("command", f"unknown command {self.command!r}")
        if self.scheme not in SCHEMES:
            raise ConfigError("scheme", f"must be one of {', '.join(SCHEMES)}")
        if self.command == "sweep" and self.scheme != "random-map":
            raise ConfigError("scheme", "sweeps only run the random-map scheme")
        if not self.n:
            raise ConfigError("n", "at least one amplifier size is required")
        if self.command == "run" and len(self.n) != 1:
            raise ConfigError("n", "run takes a single amplifier size")
        extra = 1 if self.mode == "full" else 0
        for n in self.n:
            if not isinstance(n, int) or n < 1:
                raise ConfigError("n", f"amplifier size must be a positive integer, got {n!r}")
            if n + extra > MAX_QUBITS:
                raise ConfigError("n", f"{n} amplifier spins ({n + extra} qubits) exceed the cap of {MAX_QUBITS}")
            if self.scheme == "random-map" and n < 2:
                raise ConfigError("n", "random-map needs at least 2 amplifier spins")
            if self.first not in ("end", "center"):
                try:
                    idx = int(self.first)
                except ValueError:
                    raise ConfigError("first", "must be 'end', 'center' or an index") from None
                if not 0 <= idx < n:
                    raise ConfigError("first", f"index {idx} outside an amplifier of {n}")
        if self.target not in (0, 1):
            raise ConfigError("target", "must be 0 or 1")
        if self.mode not in MODES:
            raise ConfigError("mode", f"must be one of {', '.join(MODES)}")
        if self.map_order not in MAP_ORDERS:
            raise ConfigError("map_order", f"must be one of {', '.join(MAP_ORDERS)}")
        if self.r_max < 1:
            raise ConfigError("r_max", "must be >= 1")
        for name in ("t_pert", "t_free", "threshold", "b12", "tolerance"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(name, "must be finite")
        if self.tolerance <= 0:
            raise ConfigError("tolerance", "must be positive")
        if self.decay_exponent <= 0:
            raise ConfigError("decay_exponent", "must be positive (inf for nearest neighbours)")
        if self.method not in (None, "dense-eig", "krylov"):
            raise ConfigError("method", "must be dense-eig or krylov")
        if self.krylov_dim < 2:
            raise ConfigError("krylov_dim", "must be >= 2")
        if self.workers < 1:
            raise ConfigError("workers", "must be >= 1")
        return self

    def exp_params(self) -> ExpParams:
        return ExpParams(self.method, self.tolerance, krylov_dim=self.krylov_dim)

    def map_params(self, n: int) -> MapParams:
        c = ham.CouplingModel.linear_chain(n, self.b12, self.decay_exponent)
        return MapParams(self.t_pert, self.t_free, self.r_max, c, self.map_order)

    def to_json(self) -> str:
        d = dataclasses.asdict(self)
        d["decay_exponent"] = _json_float(self.decay_exponent)
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration field")
        d = dict(d)
        if "decay_exponent" in d:
            d["decay_exponent"] = float(d["decay_exponent"])
        if isinstance(d.get("n"), int):
            d["n"] = [d["n"]]
        return cls(**d)


def _json_float(x: float):
    return "inf" if np.isinf(x) else x


# -- file output ------------------------------------------------------------


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def trace_csv(tr: TraceResult) -> str:
    rows = zip(tr.r, tr.Mz0, tr.Mz1, tr.contrast, tr.Q0, tr.Q1, tr.fidelity)
    return _csv_text(TRACE_HEADER, rows)


def read_trace_csv(path, threshold: Optional[float] = None) -> TraceResult:
    """Parse a trace file back into a :class:`TraceResult`."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {reader.fieldnames}")
        rows = list(reader)
    cols = {k: np.array([float(r[k]) for r in rows]) for k in TRACE_HEADER[1:]}
    n = int(round(cols["Mz0"][0])) if rows else 0
    tr = TraceResult(n=n, **cols)
    if threshold is not None:
        from .protocols import first_crossing

        tr.r_star, tr.threshold = first_crossing(tr.contrast, threshold), threshold
    return tr


def read_sweep_csv(path) -> list:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != SWEEP_HEADER:
            raise ValueError(f"unexpected sweep header {reader.fieldnames}")
        return [
            {
                "n": int(r["n"]),
                "N": int(r["N"]),
                "r_star": int(r["r_star"]) if r["r_star"] else None,
                "contrast_sat": float(r["contrast_sat"]),
                "Q_sat": float(r["Q_sat"]),
                "fidelity_sat": float(r["fidelity_sat"]),
            }
            for r in reader
        ]


def _metadata(cfg: RunConfig, extra: dict) -> str:
    meta = {
        "config": json.loads(cfg.to_json()),
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "conventions": {
            "qubit_order": "qubit 0 is the least significant bit; |0> has sigma_z=+1",
            "raising_operator": "sigma_+ = |0><1|",
            "rotated_dipolar_prefactor": ham.EQ2_GR_PREFACTOR,
        },
    }
    meta.update(extra)
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"


PLOT_TEMPLATE = '''"""Plot {title}. Generated by spinamp; needs numpy and matplotlib."""
import numpy as np
import matplotlib.pyplot as plt

data = np.genfromtxt({data!r}, delimiter=",", names=True)
fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6, 6))
ax1.plot(data["r"], data["contrast"], "o-", label="contrast")
ax1.set_ylabel("contrast")
ax2.plot(data["r"], data["Q1"], "s-", label="Q (target |1>)")
ax2.plot(data["r"], data["fidelity"], "^-", label="branch fidelity")
ax2.set_xlabel("repetition r")
ax2.legend()
fig.tight_layout()
fig.savefig({png!r})
'''

SWEEP_PLOT_TEMPLATE = '''"""Plot r_star against log2(N). Generated by spinamp; needs numpy and matplotlib."""
import numpy as np
import matplotlib.pyplot as plt

data = np.genfromtxt({data!r}, delimiter=",", names=True)
plt.plot(np.log2(data["N"]), data["r_star"], "o-")
plt.xlabel("log2(N)")
plt.ylabel("repetitions to reach the contrast threshold")
plt.savefig({png!r})
'''


# -- commands ---------------------------------------------------------------


def _output_dir(cfg: RunConfig) -> Path:
    return Path(cfg.output_dir or os.environ.get(OUTPUT_ENV, "spinamp-output"))


def execute_run(cfg: RunConfig) -> tuple[TraceResult, dict]:
    n = cfg.n[0]
    first = placement_index(n, cfg.first)
    if cfg.scheme == "random-map":
        spec = ProtocolSpec("random-map", n, cfg.target, cfg.mode, first)
        tr = run_random_map(spec, cfg.map_params(n), cfg.threshold, cfg.exp_params())
    else:
        tr = run_both_branches(cfg.scheme, n, cfg.mode, first)
        tr.threshold = cfg.threshold
        tr.r_star = 1 if tr.contrast[0] >= cfg.threshold else None
    mz = tr.Mz1[-1] if cfg.target == 1 else tr.Mz0[-1]
    summary = {
        "scheme": cfg.scheme,
        "n": n,
        "target": cfg.target,
        "final_Mz": float(mz),
        "final_contrast": float(tr.contrast[-1]),
        "r_star": tr.r_star,
    }
    return tr, summary


def cmd_run(cfg: RunConfig) -> int:
    out = _output_dir(cfg)
    try:
        tr, summary = execute_run(cfg)
    except Exception as exc:  # computation failure, nothing written yet
        print(f"error: {cfg.scheme} n={cfg.n[0]} failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    stem = f"{cfg.scheme}_n{cfg.n[0]}"
    _atomic_write(out / f"{stem}_trace.csv", trace_csv(tr))
    _atomic_write(out / f"{stem}_meta.json", _metadata(cfg, {"summary": summary}))
    if cfg.plot_script:
        _atomic_write(out / f"{stem}_plot.py",
                      PLOT_TEMPLATE.format(title=stem, data=f"{stem}_trace.csv", png=f"{stem}.png"))
    c = summary["final_contrast"]
    rs = summary["r_star"]
    print(f"{cfg.scheme} n={cfg.n[0]} target={cfg.target} mode={cfg.mode}: "
          f"Mz={summary['final_Mz']:.6g} C={c:.6g}"
          + (f" r_star={rs}" if cfg.scheme == "random-map" else ""))
    print(f"wrote {out / (stem + '_trace.csv')}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    out = _output_dir(cfg)
    sizes = sorted(set(cfg.n))

    def one(n):
        sub = dataclasses.replace(cfg, command="run", n=[n], plot_script=False)
        tr, _ = execute_run(sub)
        # per-row file lands atomically as soon as the row is done
        _atomic_write(out / f"sweep_n{n}_trace.csv", trace_csv(tr))
        return n, tr

    try:
        if cfg.workers > 1:
            with ThreadPoolExecutor(cfg.workers) as ex:
                results = dict(ex.map(one, sizes))
        else:
            results = dict(one(n) for n in sizes)
    except Exception as exc:
        print(f"error: sweep failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE

    from .protocols import SweepRow

    rows = [
        SweepRow(n, 2**n, results[n].r_star, results[n].saturated("contrast"),
                 results[n].saturated("Q1"), results[n].saturated("fidelity"))
        for n in sizes
    ]
    fit = fit_log_scaling(rows)
    table = _csv_text(SWEEP_HEADER, [dataclasses.astuple(r) for r in rows])
    _atomic_write(out / "sweep_table.csv", table)
    fit_report = dataclasses.asdict(fit)
    fit_report["x"] = "log2(N)"
    fit_report["y"] = "r_star"
    if not fit.defined:
        fit_report["note"] = "fit needs at least 3 sizes that reach the threshold"
    _atomic_write(out / "sweep_fit.json", json.dumps(fit_report, indent=2, sort_keys=True) + "\n")
    _atomic_write(out / "sweep_meta.json", _metadata(cfg, {"fit": fit_report}))
    if cfg.plot_script:
        _atomic_write(out / "sweep_plot.py",
                      SWEEP_PLOT_TEMPLATE.format(data="sweep_table.csv", png="sweep.png"))
    for r in rows:
        print(f"n={r.n:2d} N={r.N:6d} r_star={r.r_star} contrast_sat={r.contrast_sat:.4f} "
              f"Q_sat={r.Q_sat:.4f} fidelity_sat={r.fidelity_sat:.3e}")
    if fit.defined:
        print(f"fit r_star = {fit.slope:.4g} * log2(N) + {fit.intercept:.4g}  "
              f"(rms residual {fit.residual:.3g}, r={fit.correlation:.4f})")
    else:
        print("fit undefined: " + fit_report["note"])
    return EXIT_OK


def cmd_verify(negate_prefactor: bool = False) -> int:
    checks = verify_mod.run_all(negate_prefactor)
    for c in checks:
        print(c.line())
    print(f"rotated dipolar prefactor: {ham.EQ2_GR_PREFACTOR:g} with sigma_pm = |0><1|, |1><0| "
          f"and Pauli H_dip; {ham.EQ2_GR_PREFACTOR / 4:g} when H_dip uses spin-1/2 operators")
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_VERIFY if failed else EXIT_OK


# -- argument parsing -------------------------------------------------------


def _int_list(text: str) -> list:
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            lo, hi = part.split("-")
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _add_common(p: argparse.ArgumentParser, sweep: bool) -> None:
    p.add_argument("--config", help="JSON config written by a previous run; flags override it")
    p.add_argument("--scheme", choices=SCHEMES)
    if sweep:
        p.add_argument("--ns", help="amplifier sizes, e.g. 4,6,8 or 4-10")
    else:
        p.add_argument("--n", type=int, help="number of amplifier spins")
    p.add_argument("--target", type=int, help="target spin state reported in the summary (0 or 1)")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--first", help="spin coupled to the target: end, center or an index")
    p.add_argument("--t-pert", type=float, dest="t_pert", help="perturbation time t*b12")
    p.add_argument("--t-free", type=float, dest="t_free", help="dipolar evolution time T*b12")
    p.add_argument("--rmax", type=int, dest="r_max", help="number of map repetitions")
    p.add_argument("--threshold", type=float, help="contrast threshold defining r_star")
    p.add_argument("--b12", type=float, help="nearest-neighbour coupling b_12")
    p.add_argument("--decay-exponent", type=float, dest="decay_exponent",
                   help="coupling decay b0/|i-j|^p (inf = nearest neighbours)")
    p.add_argument("--map-order", choices=MAP_ORDERS, dest="map_order")
    p.add_argument("--method", choices=["dense-eig", "krylov"])
    p.add_argument("--tolerance", type=float)
    p.add_argument("--krylov-dim", type=int, dest="krylov_dim")
    p.add_argument("--workers", type=int, help="concurrent sweep rows")
    p.add_argument("--out", dest="output_dir", help=f"output directory (default ${OUTPUT_ENV})")
    p.add_argument("--plot-script", action="store_true", default=None, dest="plot_script",
                   help="also write a matplotlib script for the data files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinamp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_common(sub.add_parser("run", help="run one amplification scheme"), sweep=False)
    _add_common(sub.add_parser("sweep", help="random-map sweep over amplifier sizes"), sweep=True)
    v = sub.add_parser("verify", help="run the built-in identity checks")
    v.add_argument("--negate-prefactor", action="store_true",
                   help="debug: flip the sign of the rotated-dipolar constant (checks must fail)")
    return parser


_OVERRIDES = ("scheme", "target", "mode", "first", "t_pert", "t_free", "r_max", "threshold",
              "b12", "decay_exponent", "map_order", "method", "tolerance", "krylov_dim",
              "workers", "output_dir", "plot_script")


def config_from_args(args) -> RunConfig:
    base: dict = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from None
    base["command"] = args.command
    if args.command == "sweep":
        base.setdefault("scheme", "random-map")
    for name in _OVERRIDES:
        val = getattr(args, name, None)
        if val is not None:
            base[name] = val
    if args.command == "run" and args.n is not None:
        base["n"] = [args.n]
    if args.command == "sweep" and args.ns is not None:
        try:
            base["n"] = _int_list(args.ns)
        except ValueError:
            raise ConfigError("ns", f"cannot parse {args.ns!r}") from None
    try:
        cfg = RunConfig.from_dict(base)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from None
    return cfg.validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify":
        return cmd_verify(args.negate_prefactor)
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return cmd_run(cfg) if cfg.command == "run" else cmd_sweep(cfg)


if __name__ == "__main__":
    sys.exit(main())
