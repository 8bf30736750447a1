"""Command-line front end: ``qubitchain {evolve,eigen,spectrum,sweep}``.

Every output is a CSV file whose first lines are ``#`` comments echoing the
fully resolved configuration, followed by a mandatory header row. Numbers are
written with 12 significant digits.
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from . import __version__
from .chain import ChainConfig, build_effective_matrix
from .dynamics import evolve
from .emission import emission_spectrum, spectral_peaks
from .errors import ChainError, InvalidConfigError, SolverError
from .modes import characteristic_roots, dark_state_count, power_law_fit

EXIT_OK = 0
EXIT_INVALID_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4

COMMANDS = ("evolve", "eigen", "spectrum", "sweep")
SWEEP_PARAMS = ("n", "kd", "excited")


@dataclass
class RunConfig:
    command: str = "evolve"
    n: int = 5
    kd_pi: float = 0.5
    gamma: float = 1.0
    excited: Union[int, str] = 1
    initial_file: Optional[str] = None
    positions_pi: Optional[list] = None
    t_max: float = 40.0
    samples: int = 2000
    delta_min: float = -3.0
    delta_max: float = 3.0
    delta_points: int = 2001
    t_obs: float = 100.0
    method: str = "auto"
    rtol: float = 1e-10
    atol: float = 1e-12
    normalization: str = "peak"
    output: Optional[str] = None
    sweep_param: Optional[str] = None
    sweep_values: Optional[list] = None
    workers: int = 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InvalidConfigError(f"command must be one of {COMMANDS}")
        if not isinstance(self.n, int) or self.n < 1:
            raise InvalidConfigError("n must be a positive integer")
        if not (isinstance(self.excited, int) or self.excited == "center"):
            raise InvalidConfigError("excited must be a 1-based index or 'center'")
        if self.gamma <= 0:
            raise InvalidConfigError("gamma must be positive")
        if self.t_max < 0 or self.t_obs < 0:
            raise InvalidConfigError("times must be non-negative")
        if self.samples < 2 or self.delta_points < 1:
            raise InvalidConfigError("samples must be >= 2 and delta_points >= 1")
        if self.delta_max < self.delta_min:
            raise InvalidConfigError("delta_max must not be below delta_min")
        if self.method not in ("auto", "modal", "ode"):
            raise InvalidConfigError("method must be auto, modal or ode")
        if self.normalization not in ("raw", "peak"):
            raise InvalidConfigError("normalization must be raw or peak")
        if self.workers < 1:
            raise InvalidConfigError("workers must be >= 1")
        if self.command == "sweep":
            if self.sweep_param not in SWEEP_PARAMS:
                raise InvalidConfigError(f"sweep needs sweep_param in {SWEEP_PARAMS}")
            if not self.sweep_values:
                raise InvalidConfigError("sweep needs sweep_values")
        if self.sweep_param == "n" and any(int(v) != v or v < 1 for v in self.sweep_values or []):
            raise InvalidConfigError("n sweep values must be positive integers")


# --------------------------------------------------------------------------- parsing

_KD_RE = re.compile(r"^\s*([-+]?[0-9.eE+-]*)\s*(?:\*\s*)?(pi|π)\s*(?:/\s*([0-9.]+))?\s*$")


def parse_kd(text: str) -> float:
    """Return kd in units of pi from '0.5pi', 'pi/2', '3pi/4', '2π' or radians '1.57'."""
    m = _KD_RE.match(str(text))
    if m:
        mult = m.group(1)
        value = float(mult) if mult not in ("", "+", "-") else (-1.0 if mult == "-" else 1.0)
        if m.group(3):
            value /= float(m.group(3))
        return value
    try:
        return float(text) / math.pi
    except ValueError:
        raise InvalidConfigError(f"cannot parse kd {text!r}") from None


def parse_values(text: str, integer: bool = False) -> list:
    """Parse 'a:b' / 'a:b:step' (inclusive) or a comma list."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1.0)
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            values = [start + i * step for i in range(count)]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise InvalidConfigError(f"cannot parse sweep values {text!r}") from None
    if integer:
        if any(v != int(v) for v in values):
            raise InvalidConfigError(f"sweep values must be integers: {text!r}")
        return [int(v) for v in values]
    return [round(v, 12) for v in values]


def _parse_excited(text):
    if str(text).lower() in ("center", "centre", "c"):
        return "center"
    try:
        return int(text)
    except ValueError:
        raise InvalidConfigError(f"excited must be an integer or 'center', got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubitchain",
        description="Spontaneous decay of a single excitation in a waveguide-coupled qubit chain.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("evolve", "qubit amplitudes and photon probability versus time"),
        ("eigen", "characteristic roots and mode classification"),
        ("spectrum", "spectral density of the emitted photon"),
        ("sweep", "summary metrics over a parameter sweep"),
    ]:
        p = sub.add_parser(name, help=help_text, argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
        p.add_argument("-n", "--n", type=int, help="number of qubits")
        kd = p.add_mutually_exclusive_group()
        kd.add_argument("--kd", dest="kd_text", help="phase per spacing, e.g. 0.5pi, pi/2, 2pi")
        kd.add_argument("--kd-pi", dest="kd_pi", type=float, help="phase per spacing in units of pi")
        p.add_argument("--gamma", type=float, help="single-qubit decay rate")
        p.add_argument("--excited", type=_parse_excited, help="1-based excited qubit or 'center'")
        p.add_argument("--initial-file", help="JSON list of [re, im] initial amplitudes")
        p.add_argument("--positions-pi", type=lambda s: parse_values(s), help="comma list of phases k*x_n in units of pi")
        p.add_argument("--t-max", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--delta-min", type=float)
        p.add_argument("--delta-max", type=float)
        p.add_argument("--delta-points", type=int)
        p.add_argument("--t-obs", type=float, help="observation time of the spectrum")
        p.add_argument("--method", choices=("auto", "modal", "ode"))
        p.add_argument("--rtol", type=float)
        p.add_argument("--atol", type=float)
        p.add_argument("--normalization", choices=("raw", "peak"))
        p.add_argument("-o", "--output", help="output CSV path (default stdout)")
        if name in ("sweep", "eigen"):
            p.add_argument("--sweep-param", choices=SWEEP_PARAMS if name == "sweep" else ("kd",))
            p.add_argument("--values", dest="sweep_values_text", help="a:b[:step] or comma list")
            p.add_argument("--workers", type=int)
    return parser


def resolve_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    data: dict = {}
    config_path = args.pop("config", None)
    if config_path:
        try:
            data.update(json.loads(Path(config_path).read_text()))
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"config file is not valid JSON: {exc}") from None
    kd_text = args.pop("kd_text", None)
    if kd_text is not None:
        args["kd_pi"] = parse_kd(kd_text)
    values_text = args.pop("sweep_values_text", None)
    data.update(args)
    if values_text is not None:
        param = data.get("sweep_param") or ("kd" if data["command"] == "eigen" else None)
        data["sweep_param"] = param
        data["sweep_values"] = parse_values(values_text, integer=param in ("n", "excited"))
    return RunConfig.from_dict(data)


# --------------------------------------------------------------------------- formatting


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    # + 0.0 folds negative zero into zero
    return f"{float(x) + 0.0:.11e}"


def _render(cfg: RunConfig, header: list[str], rows, trailer: list[str] = ()) -> str:
    buf = io.StringIO()
    buf.write(f"# qubitchain {__version__} {cfg.command}\n")
    buf.write(f"# config: {cfg.to_json()}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    for line in trailer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def read_csv(source) -> tuple[dict, dict]:
    """Parse a qubitchain CSV; returns (config dict, {column: values}).

    Numeric columns come back as float arrays, others as lists of str.
    """
    text = Path(source).read_text() if not isinstance(source, io.StringIO) else source.getvalue()
    config: dict = {}
    header = None
    rows = []
    for line in text.splitlines():
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("config:"):
                config = json.loads(body[len("config:"):])
            continue
        if not line.strip():
            continue
        fields = line.split(",")
        if header is None:
            header = fields
        else:
            rows.append(fields)
    if header is None:
        raise ValueError("no header row")
    columns = {}
    for j, name in enumerate(header):
        raw = [r[j] for r in rows]
        try:
            columns[name] = np.array([float(v) for v in raw])
        except ValueError:
            columns[name] = raw
    return config, columns


# --------------------------------------------------------------------------- runs


def _excited_index(cfg: RunConfig, n: int) -> int:
    return (n + 1) // 2 if cfg.excited == "center" else int(cfg.excited)


def _chain(cfg: RunConfig, n=None, kd_pi=None, excited=None) -> ChainConfig:
    n = cfg.n if n is None else n
    kd_pi = cfg.kd_pi if kd_pi is None else kd_pi
    if cfg.initial_file and excited is None:
        pairs = json.loads(Path(cfg.initial_file).read_text())
        state = [complex(re_, im_) for re_, im_ in pairs]
    else:
        state = _excited_index(cfg, n) if excited is None else excited
    positions = None
    if cfg.positions_pi is not None:
        positions = [p * math.pi for p in cfg.positions_pi]
    return ChainConfig(n_qubits=n, kd=kd_pi * math.pi, gamma=cfg.gamma, positions=positions, excited=state)


def _detunings(cfg: RunConfig) -> np.ndarray:
    return np.linspace(cfg.delta_min, cfg.delta_max, cfg.delta_points)


def run_evolve(cfg: RunConfig) -> str:
    chain = _chain(cfg)
    times = np.linspace(0.0, cfg.t_max, cfg.samples)
    traj = evolve(build_effective_matrix(chain), chain.initial_state(), times, cfg.method, cfg.rtol, cfg.atol)
    n = chain.n_qubits
    header = ["t"]
    for i in range(1, n + 1):
        header += [f"re_beta_{i}", f"im_beta_{i}"]
    header += [f"prob_{i}" for i in range(1, n + 1)] + ["p_ph"]
    rows = []
    for k, t in enumerate(traj.times):
        b = traj.amplitudes[k]
        row = [t]
        for v in b:
            row += [v.real, v.imag]
        rows.append(row + list(traj.probabilities[k]) + [traj.p_photon[k]])
    return _render(cfg, header, rows)


def _mode_rows(chain: ChainConfig):
    modes = characteristic_roots(build_effective_matrix(chain))
    for i, (lam, e, g, cls) in enumerate(
        zip(modes.roots, modes.energies, modes.decay_rates, modes.classification), start=1
    ):
        yield [i, lam.real, lam.imag, e, g, cls]


def run_eigen(cfg: RunConfig) -> str:
    header = ["index", "re_lambda", "im_lambda", "E_i", "Gamma_i", "class"]
    if cfg.sweep_param == "kd" and cfg.sweep_values:
        rows = [[v] + r for v in cfg.sweep_values for r in _mode_rows(_chain(cfg, kd_pi=v))]
        return _render(cfg, ["sweep_value"] + header, rows)
    return _render(cfg, header, list(_mode_rows(_chain(cfg))))


def run_spectrum(cfg: RunConfig) -> str:
    chain = _chain(cfg)
    result = emission_spectrum(
        build_effective_matrix(chain),
        chain.phases,
        chain.initial_state(),
        _detunings(cfg),
        cfg.t_obs,
        cfg.method,
        cfg.normalization,
        cfg.rtol,
        cfg.atol,
    )
    rows = zip(result.detunings, result.s_raw, result.s_values)
    return _render(cfg, ["delta", "s_raw", "s_norm"], rows)


def sweep_point(cfg: RunConfig, value) -> dict:
    """Summary metrics for one sweep point; errors are returned, not raised."""
    try:
        kwargs = {{"n": "n", "kd": "kd_pi", "excited": "excited"}[cfg.sweep_param]: value}
        chain = _chain(cfg, **kwargs)
        matrix = build_effective_matrix(chain)
        modes = characteristic_roots(matrix)
        initial = chain.initial_state()
        traj = evolve(matrix, initial, np.array([0.0, cfg.t_max]), cfg.method, cfg.rtol, cfg.atol)
        spec = emission_spectrum(matrix, chain.phases, initial, _detunings(cfg), cfg.t_obs, cfg.method,
                                 rtol=cfg.rtol, atol=cfg.atol)
        peaks = spectral_peaks(spec.detunings, spec.s_values)
        return {
            "sweep_value": value,
            "min_gamma_i": float(modes.decay_rates.min()),
            "dark_count": dark_state_count(modes),
            "p_ph_final": float(traj.p_photon[-1]),
            "peak_hwhm": peaks[0].hwhm if peaks else float("nan"),
        }
    except (ChainError, ValueError, np.linalg.LinAlgError) as exc:
        return {"sweep_value": value, "error": f"{type(exc).__name__}: {exc}"}


def _sweep_worker(args):
    return sweep_point(*args)


def run_sweep(cfg: RunConfig) -> tuple[str, int]:
    tasks = [(cfg, v) for v in cfg.sweep_values]
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_sweep_worker, tasks))
    else:
        results = [_sweep_worker(t) for t in tasks]

    header = ["sweep_value", "min_gamma_i", "dark_count", "p_ph_final", "peak_hwhm"]
    rows, trailer = [], []
    for i, r in enumerate(results):
        if "error" in r:
            rows.append([r["sweep_value"], math.nan, math.nan, math.nan, math.nan])
            trailer.append(f"row {i} failed: {r['error']}")
        else:
            rows.append([r[k] for k in header])

    good = [r for r in results if "error" not in r]
    if cfg.sweep_param == "n":
        pts = [(r["sweep_value"], r["min_gamma_i"]) for r in good if r["min_gamma_i"] > 0]
        if len(pts) >= 2:
            slope, intercept, r2 = power_law_fit(*zip(*pts))
            report = {"fit": "min_gamma_i = exp(intercept) * n**slope", "slope": float(fmt(slope)),
                      "intercept": float(fmt(intercept)), "r2": float(fmt(r2)), "points": len(pts)}
            trailer.append("fit: " + json.dumps(report, sort_keys=True))
    status = EXIT_SOLVER if not good else EXIT_OK
    return _render(cfg, header, rows, trailer), status


def execute(cfg: RunConfig) -> tuple[str, int]:
    if cfg.command == "evolve":
        return run_evolve(cfg), EXIT_OK
    if cfg.command == "eigen":
        return run_eigen(cfg), EXIT_OK
    if cfg.command == "spectrum":
        return run_spectrum(cfg), EXIT_OK
    return run_sweep(cfg)


def _fail(kind: str, message: str, code: int) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        text, status = execute(cfg)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_INVALID_CONFIG if exc.code not in (0, None) else EXIT_OK
    except SolverError as exc:
        return _fail("solver_failure", str(exc), EXIT_SOLVER)
    except (InvalidConfigError, ValueError) as exc:
        return _fail("invalid_config", str(exc), EXIT_INVALID_CONFIG)
    except OSError as exc:
        return _fail("io_failure", str(exc), EXIT_IO)

    try:
        if cfg.output:
            Path(cfg.output).write_text(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        return _fail("io_failure", str(exc), EXIT_IO)
    return status


if __name__ == "__main__":
    sys.exit(main())
