"""Experiment recipes, key-value configs and CSV/metadata output."""
from __future__ import annotations

import configparser
import csv
import io
import math
import re
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla

from . import __version__, magnon
from .core import PureState, RegisterLayout, entropy_from_eigenvalues, subsystem_entropy
from .darwinism import mi_profile, mi_surface, plateau_report
from .dynamics import EvolutionSpec, evolve_branches, full_hamiltonian, global_state, product_initial
from .nonmarkov import WINDOW, blp_converged, distance_trajectory, uniform_grid
from .xxmodel import DegenerateSectorWarning, build_xx_bath, ground_sector, representative_fields, sector_energies, sector_ground

EXPERIMENTS = {
    "fig1": "I(S:F) profiles at d*t = pi/4, lambda = 0, one per ground sector",
    "fig2": "I(S:F) over time for H = H_SE + lambda H_B",
    "fig3": "BLP measure versus field",
    "fig4": "BLP measure just below h_C versus bath size",
    "custom": "MI surface plus BLP for one (N, h); optional brute-force oracle",
}

COLUMNS = {
    "fig1": ("h", "n", "F", "I_bits", "I_over_HS"),
    "fig2": ("lambda", "t", "F", "I_bits", "delta"),
    "fig3": ("h", "n", "N_blp"),
    "fig4": ("N", "N_blp_at_hc_minus"),
    "custom": ("lambda", "t", "F", "I_bits", "delta"),
    "oracle": ("N", "check", "max_abs_dev"),
}

ORACLE_TOL = 1e-8


class ConfigError(ValueError):
    pass


class OracleDeviation(RuntimeError):
    pass


class StrictDegeneracyError(RuntimeError):
    pass


_PI_RE = re.compile(r"^\s*([-+]?[0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*$")


def parse_number(text: str) -> float:
    """Float literal, or a multiple of pi such as ``pi/4``, ``0.5pi``, ``2*pi/3``."""
    text = text.strip()
    try:
        return float(text)
    except ValueError:
        pass
    m = _PI_RE.match(text)
    if not m:
        raise ConfigError(f"cannot parse number {text!r}")
    coef = m.group(1)
    a = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    b = float(m.group(2)) if m.group(2) else 1.0
    return a * math.pi / b


def _numbers(text: str) -> tuple[float, ...]:
    return tuple(parse_number(t) for t in text.split(",") if t.strip())


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    N: int = 12
    N_list: tuple = ()
    h: tuple = ()
    h_range: tuple = ()
    lambdas: tuple = (0.0,)
    d: float = 1.0
    time: float = math.pi / 4
    t_stop: float = math.pi
    t_steps: int = 80
    window: tuple = WINDOW
    intervals: int = 4096
    fragment_strategy: str = "contiguous"
    oracle: bool = False
    strict: bool = False
    tolerance: float = ORACLE_TOL
    name: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        if self.experiment != "fig4" and self.N < 3:
            raise ConfigError("N must be at least 3 (XX ring)")
        if self.experiment == "fig4":
            if not self.N_list or any(n < 1 for n in self.N_list):
                raise ConfigError("fig4 needs N_list with positive sizes")
        if any(lam < 0 for lam in self.lambdas):
            raise ConfigError("lambda values must be non-negative")
        if self.d <= 0:
            raise ConfigError("d must be positive")
        if self.t_steps < 1 or self.t_stop <= 0:
            raise ConfigError("time grid needs t_stop > 0 and t_steps >= 1")
        if len(self.window) != 2 or not self.window[0] < self.window[1]:
            raise ConfigError("window must be two increasing times")
        if self.intervals < 2 or self.intervals % 2:
            raise ConfigError("intervals must be an even number >= 2")
        if self.h_range and len(self.h_range) != 3:
            raise ConfigError("h_range is 'start, stop, count'")
        if self.fragment_strategy not in ("contiguous", "average"):
            raise ConfigError(f"unknown fragment strategy {self.fragment_strategy!r}")
        if self.fragment_strategy == "average" and self.N > 12:
            raise ConfigError("fragment averaging is limited to N <= 12")
        if self.experiment in ("fig1", "fig2", "custom") and self.N > 16:
            raise ConfigError("full-space experiments are limited to N <= 16")
        if self.oracle and self.N > 10:
            raise ConfigError("oracle mode is limited to N <= 10")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")

    @property
    def label(self) -> str:
        return self.name or self.experiment

    def field_values(self) -> tuple[float, ...]:
        if self.h_range:
            start, stop, count = self.h_range
            return tuple(float(x) for x in np.linspace(start, stop, int(count)))
        return self.h

    def time_grid(self) -> tuple[float, ...]:
        return tuple(float(t) for t in np.linspace(0.0, self.t_stop, self.t_steps + 1))


_INT_KEYS = {"N", "t_steps", "intervals"}
_FLOAT_KEYS = {"d", "time", "t_stop", "tolerance"}
_LIST_KEYS = {"h", "h_range", "lambdas", "window"}
_BOOL_KEYS = {"oracle", "strict"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse ``key = value`` lines (``#`` comments allowed)."""
    cp = configparser.ConfigParser(comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    sec = cp["experiment"]
    if "experiment" not in sec:
        raise ConfigError("config must name an experiment")
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    kwargs = {}
    for key, raw in sec.items():
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            if key == "N_list":
                kwargs[key] = tuple(int(x) for x in raw.split(",") if x.strip())
            elif key == "h" and raw.strip() == "auto":
                kwargs[key] = ()
            elif key in _INT_KEYS:
                kwargs[key] = int(raw)
            elif key in _FLOAT_KEYS:
                kwargs[key] = parse_number(raw)
            elif key in _LIST_KEYS:
                kwargs[key] = _numbers(raw)
            elif key in _BOOL_KEYS:
                kwargs[key] = sec.getboolean(key)
            else:
                kwargs[key] = raw.strip()
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from exc
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def fmt(x) -> str:
    """Locale-independent rendering with 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0:
            return "0"
        return format(x, ".12g")
    if isinstance(x, (tuple, list)):
        return ", ".join(fmt(v) for v in x)
    return str(x)


@dataclass
class ResultTable:
    columns: tuple
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def add(self, *row):
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, schema has {len(self.columns)}")
        self.rows.append(tuple(row))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([fmt(v) for v in row])
        return buf.getvalue()

    def metadata_text(self) -> str:
        return "".join(f"{k} = {fmt(v)}\n" for k, v in self.metadata.items())

    def write(self, out_dir, name: str) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / f"{name}.csv"
        meta_path = out / f"{name}.meta"
        csv_path.write_text(self.csv_text(), encoding="utf-8")
        meta_path.write_text(self.metadata_text(), encoding="utf-8")
        return csv_path, meta_path


def _pmap(fn, items, workers: int):
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _fig1(cfg: ExperimentConfig, table: ResultTable, workers: int):
    N = cfg.N
    fields = cfg.field_values()
    items = [(h, ground_sector(N, h)) for h in fields] if fields else representative_fields(N)

    def one(item):
        h, n = item
        G = sector_ground(N, h, n).vector
        pair = evolve_branches(G, EvolutionSpec(N, cfg.d, 0.0, h), cfg.time)
        return h, n, mi_profile(global_state(pair), cfg.fragment_strategy, cfg.time)

    for h, n, prof in _pmap(one, items, workers):
        ratio = prof.ratio
        for k in range(N + 1):
            table.add(h, n, k, prof.entries[k], ratio[k])
        rep = plateau_report(prof)
        table.metadata[f"H_S[h={fmt(h)}]"] = prof.H_S
        table.metadata[f"delta[h={fmt(h)}]"] = rep.delta if rep.defined else "undefined"


def _surface_rows(cfg: ExperimentConfig, h: float, table: ResultTable, workers: int):
    N = cfg.N
    n = ground_sector(N, h)
    grid = cfg.time_grid()
    table.metadata["initial_sector"] = n

    def one(lam):
        return lam, mi_surface(EvolutionSpec(N, cfg.d, lam, h, grid), n, cfg.fragment_strategy)

    for lam, surface in _pmap(one, cfg.lambdas, workers):
        quarter = int(np.argmin(np.abs(np.asarray(grid) * cfg.d - math.pi / 4)))
        for prof in surface:
            rep = plateau_report(prof)
            delta = rep.delta if rep.defined else float("nan")
            for k in range(N + 1):
                table.add(lam, prof.time, k, prof.entries[k], delta)
        rep = plateau_report(surface[quarter])
        table.metadata[f"delta_at_quarter_period[lambda={fmt(lam)}]"] = rep.delta if rep.defined else "undefined"


def _fig2(cfg, table, workers):
    fields = cfg.field_values() or (1.0,)
    _surface_rows(cfg, fields[0], table, workers)


def _fig3(cfg: ExperimentConfig, table: ResultTable, workers: int):
    N = cfg.N
    fields = cfg.field_values() or tuple(float(x) for x in np.linspace(0.0, 1.5, 151))
    sectors = sorted({ground_sector(N, h) for h in fields})

    def one(n):
        h = next(h for h in fields if ground_sector(N, h) == n)
        return n, blp_converged(EvolutionSpec(N, cfg.d, 0.0, h), n, cfg.window, cfg.intervals)

    results = dict(_pmap(one, sectors, workers))
    for h in fields:
        n = ground_sector(N, h)
        table.add(h, n, results[n].value)
    for n, res in sorted(results.items()):
        table.metadata[f"convergence[n={n}]"] = res.convergence
        table.metadata[f"intervals[n={n}]"] = res.intervals


def _fig4(cfg: ExperimentConfig, table: ResultTable, workers: int):
    def one(N):
        return N, blp_converged(EvolutionSpec(N, cfg.d, 0.0, 1.0), 1, cfg.window, cfg.intervals, path="magnon")

    for N, res in _pmap(one, cfg.N_list, workers):
        table.add(N, res.value)
        table.metadata[f"convergence[N={N}]"] = res.convergence


def _custom(cfg: ExperimentConfig, table: ResultTable, workers: int):
    fields = cfg.field_values() or (1.0,)
    h = fields[0]
    _surface_rows(cfg, h, table, workers)
    n = ground_sector(cfg.N, h)
    res = blp_converged(EvolutionSpec(cfg.N, cfg.d, 0.0, h), n, cfg.window, cfg.intervals)
    table.metadata["N_blp"] = res.value
    table.metadata["N_blp_convergence"] = res.convergence
    if cfg.oracle:
        devs = oracle_checks(cfg.N, fields=(h,), lambdas=tuple(cfg.lambdas), d=cfg.d)
        worst = 0.0
        for check, dev in devs:
            table.metadata[f"oracle.{check}"] = dev
            worst = max(worst, dev)
        table.metadata["oracle.max_abs_dev"] = worst
        if worst > cfg.tolerance:
            raise OracleDeviation(f"oracle deviation {worst:.3e} exceeds {cfg.tolerance:.1e}")


_RUNNERS = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "custom": _custom}


def run_experiment(cfg: ExperimentConfig, out_dir=None, workers: int = 1, strict: bool | None = None) -> ResultTable:
    """Run one recipe; write ``<name>.csv`` and ``<name>.meta`` when ``out_dir`` is given."""
    strict = cfg.strict if strict is None else strict
    table = ResultTable(COLUMNS[cfg.experiment])
    start = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegenerateSectorWarning)
        _RUNNERS[cfg.experiment](cfg, table, workers)
    degenerate = sorted({str(w.message) for w in caught if issubclass(w.category, DegenerateSectorWarning)})
    if degenerate and strict:
        raise StrictDegeneracyError("; ".join(degenerate))
    meta = {"experiment": cfg.experiment, "code_version": __version__}
    meta.update({f"config.{k}": v for k, v in asdict(cfg).items()})
    meta["degeneracy_warnings"] = " | ".join(degenerate) if degenerate else "none"
    meta.update(table.metadata)
    meta["wall_time_s"] = round(time.perf_counter() - start, 3)
    table.metadata = meta
    if out_dir is not None:
        table.write(out_dir, cfg.label)
    return table


def _amp_dev(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b)))


def oracle_checks(N: int, fields=(0.0, 0.5, 1.5), lambdas=(0.0, 0.5), d: float = 1.0, times=(0.3, 0.9, math.pi / 4)):
    """Deviations between the production paths and dense brute force at one N."""
    out = []
    # sector diagonalization against the dense 2^N spectrum
    devs = []
    for h in fields:
        dense_spec = np.linalg.eigvalsh(build_xx_bath(N, h).dense())
        devs.append(abs(sector_energies(N, h).min() - dense_spec[0]))
    out.append(("ground_energy", max(devs)))

    prop, fast = [], []
    for h in fields:
        n = ground_sector(N, h)
        G = sector_ground(N, h, n).vector
        psi0 = product_initial(G).amplitudes
        for lam in lambdas:
            spec = EvolutionSpec(N, d, lam, h)
            H = full_hamiltonian(spec).dense()
            for t in times:
                ref = sla.expm(-1j * t * H) @ psi0
                kry = global_state(evolve_branches(G, spec, t, method="krylov")).amplitudes
                prop.append(_amp_dev(kry, ref))
                if lam == 0.0:
                    rot = global_state(evolve_branches(G, spec, t, method="rotation")).amplitudes
                    fast.append(max(_amp_dev(rot, ref), _amp_dev(rot, kry)))
    out.append(("krylov_vs_dense", max(prop)))
    if fast:
        out.append(("rotation_vs_krylov_dense", max(fast)))

    nu_dev, ent_dev, mi_dev = [], [], []
    H = full_hamiltonian(EvolutionSpec(N, d, 0.0)).dense()
    for sector in (0, 1):
        c0 = magnon.MagnonState.dicke(N, sector)
        psi0 = product_initial(magnon.lift(c0)).amplitudes
        for t in times:
            state = PureState.normalized(RegisterLayout(N, True), sla.expm(-1j * t * H) @ psi0)
            up, dn = magnon.branch_pair(c0, t, d)
            rho_s = state.amplitudes.reshape(-1, 2)
            nu_dense = np.vdot(rho_s[:, 1], rho_s[:, 0]) * 2
            nu_dev.append(abs(magnon.loschmidt_amplitude(up, dn) - nu_dense))
            prof_dense = mi_profile(state, time=t)
            prof_closed = magnon.mi_profile_closed_form(up, dn)[0]
            mi_dev.append(_amp_dev(prof_dense.entries, prof_closed))
            for k in range(1, N + 1):
                e_closed = entropy_from_eigenvalues(magnon.fragment_state_closed_form(up, dn, k, True).eigenvalues())
                e_dense = subsystem_entropy(state, range(0, k + 1))
                ent_dev.append(abs(e_closed - e_dense))
    out.append(("magnon_nu", max(nu_dev)))
    out.append(("magnon_entropy", max(ent_dev)))
    out.append(("magnon_mi_profile", max(mi_dev)))

    traj_dev = []
    grid = uniform_grid(WINDOW, 64)
    for h in fields:
        n = ground_sector(N, h)
        spec = EvolutionSpec(N, d, 0.0, h)
        full = distance_trajectory(spec, n, grid, path="full").D
        br = distance_trajectory(spec, n, grid, path="branches").D
        traj_dev.append(_amp_dev(full, br))
        if n in (0, 1):
            traj_dev.append(_amp_dev(full, distance_trajectory(spec, n, grid, path="magnon").D))
    out.append(("distance_trajectory", max(traj_dev)))
    return out


def run_oracle_suite(max_N: int, tol: float = ORACLE_TOL, workers: int = 1) -> ResultTable:
    """Brute-force cross-checks for N = 3..max_N; raises if any deviation exceeds ``tol``."""
    if max_N > 10:
        raise ConfigError("oracle suite is limited to max_N <= 10")
    if max_N < 3:
        raise ConfigError("oracle suite needs max_N >= 3")
    table = ResultTable(COLUMNS["oracle"])
    start = time.perf_counter()
    results = _pmap(oracle_checks, range(3, max_N + 1), workers)
    worst = 0.0
    for N, checks in zip(range(3, max_N + 1), results):
        for check, dev in checks:
            table.add(N, check, dev)
            worst = max(worst, dev)
    table.metadata = {
        "experiment": "oracle",
        "code_version": __version__,
        "max_N": max_N,
        "tolerance": tol,
        "max_abs_dev": worst,
        "wall_time_s": round(time.perf_counter() - start, 3),
    }
    return table
