"""Experiment configuration, sweep execution and result emission.

One experiment is a Cartesian product of scenario points (antenna and
element counts), schemes, and seeds. Every run gets its channel from a
seed-plus-dimensions stream so all schemes at one sweep point see the
same channel realization. Results land in a fixed-order CSV, one
per-epoch CSV per run, and one solution archive per run that carries
the channels alongside the solution, so any reported rate can be
re-scored independently of this module.

Config files are plain ``key = value`` text (format version 1); blank
lines and ``#`` comments are ignored. Unknown keys are rejected with
the offending line. :data:`CONFIG_KEYS` lists every key with its
default; :func:`write_config` emits the fully resolved form, which
parses back to an identical configuration.
"""

import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import grid_oracle_tiny, random_phases_baseline
from .channel import ChannelSet, FadingParams, NodeGeometry, generate_channel_set
from .metaopt import MetaConfig, RunConfig, run_meta_training
from .sysmodel import (Architecture, MagnitudeMode, Solution, SystemConfig,
                       score_solution)

CONFIG_VERSION = 1
MAX_WORKERS_ENV = "BDRIS_RSMA_MAX_WORKERS"

SCHEME_BD = "bd-ris"
SCHEME_DIAGONAL = "diagonal-ris"
SCHEME_RANDOM = "random-phases"
KNOWN_SCHEMES = (SCHEME_BD, SCHEME_DIAGONAL, SCHEME_RANDOM)

RESULT_COLUMNS = ("run_id", "scheme", "seed", "n_antennas", "m_elements",
                  "n_groups", "best_sum_rate", "rate_ue1", "rate_ue2",
                  "initial_sum_rate", "max_residual", "epochs_run", "status",
                  "wall_time_seconds")
EPOCH_COLUMNS = ("epoch", "mean_loss", "best_sum_rate", "rate_term",
                 "threshold_term", "norm_term", "surface_term", "power_term")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description (all defaults applied)."""

    geometry: NodeGeometry = NodeGeometry()
    fading: FadingParams = FadingParams()
    n_antennas: int = 4
    m_elements: int = 8
    n_groups: int = 2
    group_sizes: tuple = ()          # empty = even split of m over groups
    magnitude_mode: MagnitudeMode = MagnitudeMode.SCALED
    max_power_dbm_ue1: float = 23.0
    max_power_dbm_ue2: float = 23.0
    rate_threshold_ue1: float = 1.0
    rate_threshold_ue2: float = 1.0
    meta: MetaConfig = MetaConfig()
    schemes: tuple = (SCHEME_BD, SCHEME_DIAGONAL)
    seeds: tuple = tuple(range(10))
    out_dir: str = "results"
    random_trials: int = 1000
    oracle_levels: int = 16

    def __post_init__(self):
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        if not self.schemes:
            raise ValueError("schemes must be non-empty")
        for s in self.schemes:
            if s not in KNOWN_SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; expected one of "
                                 f"{', '.join(KNOWN_SCHEMES)}")
        if self.n_antennas < 1 or self.m_elements < 1 or self.n_groups < 1:
            raise ValueError(f"counts must be positive, got N={self.n_antennas}, "
                             f"M={self.m_elements}, G={self.n_groups}")
        if self.group_sizes:
            if any(g < 1 for g in self.group_sizes):
                raise ValueError(f"group sizes must be positive, got {self.group_sizes}")
            if sum(self.group_sizes) != self.m_elements:
                raise ValueError(f"group sizes {self.group_sizes} sum to "
                                 f"{sum(self.group_sizes)}, expected {self.m_elements}")
            if len(self.group_sizes) != self.n_groups:
                raise ValueError(f"{len(self.group_sizes)} group sizes listed "
                                 f"but n_groups = {self.n_groups}")
        elif self.m_elements % self.n_groups:
            raise ValueError(f"m_elements = {self.m_elements} does not divide "
                             f"evenly into {self.n_groups} groups; list "
                             f"group_sizes explicitly")
        if self.random_trials < 1:
            raise ValueError(f"random_trials must be at least 1, got {self.random_trials}")

    def sizes_for(self, m):
        """Group sizes at element count m (explicit sizes apply only to the
        configured base m; swept values use an even split)."""
        if self.group_sizes and m == self.m_elements:
            return tuple(self.group_sizes)
        if m % self.n_groups:
            raise ValueError(f"m = {m} does not divide into {self.n_groups} groups")
        return (m // self.n_groups,) * self.n_groups

    def system_config(self, scheme, n=None, m=None):
        """SystemConfig for one scheme at one (possibly swept) sweep point."""
        n = self.n_antennas if n is None else n
        m = self.m_elements if m is None else m
        if scheme == SCHEME_DIAGONAL:
            architecture, sizes = Architecture.SINGLE_CONNECTED, (1,) * m
        else:
            sizes = self.sizes_for(m)
            architecture = (Architecture.FULLY_CONNECTED if len(sizes) == 1
                            else Architecture.GROUP_CONNECTED)
        return SystemConfig(
            n_antennas=n, m_elements=m, architecture=architecture,
            group_sizes=sizes, magnitude_mode=self.magnitude_mode,
            max_power_ue1_w=dbm_to_watt(self.max_power_dbm_ue1),
            max_power_ue2_w=dbm_to_watt(self.max_power_dbm_ue2),
            rate_threshold_ue1=self.rate_threshold_ue1,
            rate_threshold_ue2=self.rate_threshold_ue2,
            noise_power_w=self.fading.noise_power_w)


def dbm_to_watt(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


# -- config file parsing -------------------------------------------------------

def _parse_bool(text):
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1", "on"):
        return True
    if lowered in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _parse_ints(text):
    return tuple(int(tok) for tok in _tokens(text))


def _parse_floats(text):
    return tuple(float(tok) for tok in _tokens(text))


def _parse_position(text):
    values = _parse_floats(text)
    if len(values) != 3:
        raise ValueError(f"positions need exactly three coordinates, got {len(values)}")
    return values


def _parse_strings(text):
    return tuple(_tokens(text))


def _tokens(text):
    toks = [tok.strip() for tok in text.split(",")]
    return [tok for tok in toks if tok]


def _parse_magnitude(text):
    table = {"scaled": MagnitudeMode.SCALED, "scaled-modulus": MagnitudeMode.SCALED,
             "unit": MagnitudeMode.UNIT, "unit-modulus": MagnitudeMode.UNIT}
    lowered = text.strip().lower()
    if lowered not in table:
        raise ValueError(f"expected scaled or unit, got {text!r}")
    return table[lowered]


def _format_magnitude(mode):
    return "scaled" if mode is MagnitudeMode.SCALED else "unit"


def _fmt_float(x):
    return repr(float(x))


def _fmt_seq(values):
    return ",".join(str(v) for v in values)


def _fmt_float_seq(values):
    return ",".join(repr(float(v)) for v in values)


class _Key:
    """One config key: how to parse it, where it lands, how to emit it."""

    def __init__(self, parse, fmt, get, put):
        self.parse, self.fmt, self.get, self.put = parse, fmt, get, put


def _geometry_key(field):
    return _Key(_parse_position, _fmt_float_seq,
                lambda c: getattr(c.geometry, field),
                lambda d, v: d["geometry"].__setitem__(field, v))


def _fading_key(field, parse=float, fmt=_fmt_float):
    return _Key(parse, fmt,
                lambda c: getattr(c.fading, field),
                lambda d, v: d["fading"].__setitem__(field, v))


def _top_key(field, parse, fmt):
    return _Key(parse, fmt,
                lambda c: getattr(c, field),
                lambda d, v: d.__setitem__(field, v))


def _meta_key(field, parse=float, fmt=_fmt_float):
    return _Key(parse, fmt,
                lambda c: getattr(c.meta, field),
                lambda d, v: d["meta"].__setitem__(field, v))


CONFIG_KEYS = {
    "config_version": _Key(int, str, lambda c: CONFIG_VERSION, lambda d, v: None),
    # geometry (meters)
    "bs_position": _geometry_key("bs"),
    "ris_position": _geometry_key("ris"),
    "ue1_position": _geometry_key("ue1"),
    "ue2_position": _geometry_key("ue2"),
    # large/small-scale fading
    "reference_loss_db": _fading_key("reference_loss_db"),
    "reference_distance_m": _fading_key("reference_distance_m"),
    "pathloss_exponent_direct": _fading_key("exponent_direct"),
    "pathloss_exponent_ris": _fading_key("exponent_ris"),
    "rician_k_db": _fading_key("rician_k_db"),
    "noise_power_dbm": _fading_key("noise_power_dbm"),
    # scenario
    "n_antennas": _top_key("n_antennas", int, str),
    "m_elements": _top_key("m_elements", int, str),
    "n_groups": _top_key("n_groups", int, str),
    "group_sizes": _top_key("group_sizes", _parse_ints, _fmt_seq),
    "magnitude_mode": _top_key("magnitude_mode", _parse_magnitude, _format_magnitude),
    "max_power_dbm_ue1": _top_key("max_power_dbm_ue1", float, _fmt_float),
    "max_power_dbm_ue2": _top_key("max_power_dbm_ue2", float, _fmt_float),
    "rate_threshold_ue1": _top_key("rate_threshold_ue1", float, _fmt_float),
    "rate_threshold_ue2": _top_key("rate_threshold_ue2", float, _fmt_float),
    # meta-optimizer
    "epochs": _meta_key("epochs", int, str),
    "outer_iterations": _meta_key("outer_iterations", int, str),
    "inner_iterations": _meta_key("inner_iterations", int, str),
    "lr_beamformer": _meta_key("lr_beamformer"),
    "lr_power": _meta_key("lr_power"),
    "lr_phase": _meta_key("lr_phase"),
    "hidden_units": _meta_key("hidden_units", int, str),
    "phase_step_scale": _meta_key("phase_step_scale"),
    "phase_update_period": _meta_key("phase_update_period", int, str),
    "penalty_threshold": _meta_key("penalty_threshold"),
    "penalty_norm": _meta_key("penalty_norm"),
    "penalty_surface": _meta_key("penalty_surface"),
    "penalty_power": _meta_key("penalty_power"),
    "strict_paper": _meta_key("strict_paper", _parse_bool, lambda v: str(bool(v)).lower()),
    "per_group_phase_nets": _meta_key("per_group_phase_nets", _parse_bool,
                                      lambda v: str(bool(v)).lower()),
    "adam_beta1": _meta_key("adam_beta1"),
    "adam_beta2": _meta_key("adam_beta2"),
    "adam_epsilon": _meta_key("adam_epsilon"),
    # experiment plan
    "schemes": _top_key("schemes", _parse_strings, _fmt_seq),
    "seeds": _top_key("seeds", _parse_ints, _fmt_seq),
    "out_dir": _top_key("out_dir", str.strip, str),
    "random_trials": _top_key("random_trials", int, str),
    "oracle_levels": _top_key("oracle_levels", int, str),
}


class ConfigError(ValueError):
    """Config file rejected; the message carries file and line context."""


def parse_config_text(text, source="<config>"):
    """Parse config text into a fully validated ExperimentConfig."""
    staged = {"geometry": {}, "fading": {}, "meta": {}}
    where = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue

        def fail(reason):
            raise ConfigError(f"{source}:{lineno}: {reason} (line: {raw.strip()!r})")

        if "=" not in line:
            fail("expected 'key = value'")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.partition("#")[0].strip()
        if key not in CONFIG_KEYS:
            fail(f"unknown key {key!r}")
        if key in where:
            fail(f"duplicate key {key!r} (first set on line {where[key]})")
        where[key] = lineno
        try:
            parsed = CONFIG_KEYS[key].parse(value)
        except ValueError as exc:
            fail(f"bad value for {key!r}: {exc}")
        if key == "config_version":
            if parsed != CONFIG_VERSION:
                fail(f"unsupported config_version {parsed}; this build reads "
                     f"version {CONFIG_VERSION}")
            continue
        CONFIG_KEYS[key].put(staged, parsed)

    _check_cross_fields(staged, where, source)
    kwargs = {k: v for k, v in staged.items() if k not in ("geometry", "fading", "meta")}
    if staged["geometry"]:
        kwargs["geometry"] = NodeGeometry(**staged["geometry"])
    if staged["fading"]:
        kwargs["fading"] = FadingParams(**staged["fading"])
    if staged["meta"]:
        kwargs["meta"] = MetaConfig(**staged["meta"])
    try:
        return ExperimentConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def _check_cross_fields(staged, where, source):
    """Cross-field validations reported against the lines that set them."""
    def resolved(key):
        if key in staged:
            return staged[key]
        return ExperimentConfig.__dataclass_fields__[key].default

    def at(key):
        return f"{source}:{where[key]}" if key in where else f"{source} (default)"

    for key in ("n_antennas", "m_elements", "n_groups"):
        if resolved(key) < 1:
            raise ConfigError(f"{at(key)}: {key} must be positive, got {resolved(key)}")
    sizes = resolved("group_sizes")
    m = resolved("m_elements")
    if sizes and sum(sizes) != m:
        raise ConfigError(f"{at('group_sizes')}: group sizes {sizes} sum to "
                          f"{sum(sizes)}, but m_elements = {m} (set at {at('m_elements')})")


def load_config(path):
    """Read and validate a config file; defaults fill unspecified keys."""
    path = Path(path)
    return parse_config_text(path.read_text(), source=str(path))


def format_config(config, header=()):
    """Render a config as fully resolved key=value text (round-trips
    through parse_config_text to an equal ExperimentConfig)."""
    out = io.StringIO()
    for line in header:
        out.write(f"# {line}\n" if line else "#\n")
    for key, spec in CONFIG_KEYS.items():
        value = spec.get(config)
        if key == "group_sizes" and not value:
            continue                      # empty tuple = even split default
        out.write(f"{key} = {spec.fmt(value)}\n")
    return out.getvalue()


def write_config(config, path, header=()):
    Path(path).write_text(format_config(config, header=header))


# -- sweep execution -----------------------------------------------------------

@dataclass(frozen=True)
class ResultRow:
    """One line of the results table (column order = RESULT_COLUMNS)."""

    run_id: str
    scheme: str
    seed: int
    n_antennas: int
    m_elements: int
    n_groups: int
    best_sum_rate: float
    rate_ue1: float
    rate_ue2: float
    initial_sum_rate: float
    max_residual: float
    epochs_run: int
    status: str
    wall_time_seconds: float

    def csv_values(self):
        vals = []
        for col in RESULT_COLUMNS:
            v = getattr(self, col)
            vals.append(f"{v:.16e}" if isinstance(v, float) else str(v))
        return vals


@dataclass
class RunRecord:
    """Full output of one run: the table row plus its artifacts."""

    row: ResultRow
    epoch_rows: list          # tuples matching EPOCH_COLUMNS
    archive: dict             # numpy arrays for the solution .npz


@dataclass
class SweepResult:
    records: list

    @property
    def rows(self):
        return [rec.row for rec in self.records]


def channel_rng_key(seed, n, m):
    """Channel stream identity: schemes at one sweep point share channels."""
    return [int(seed), int(n), int(m)]


def training_rng_key(seed):
    return [int(seed), 1000]


def random_baseline_rng_key(seed):
    return [int(seed), 2000]


def run_id_for(scheme, n, m, seed):
    return f"{scheme}_N{n}_M{m}_s{seed}"


def sweep_points(config, vary=None, values=None):
    """(n, m) scenario points; no vary = the config's single point."""
    if vary is None:
        return [(config.n_antennas, config.m_elements)]
    if not values:
        raise ValueError("a swept axis needs a non-empty list of values")
    axis = vary.upper()
    if axis == "M":
        return [(config.n_antennas, int(m)) for m in values]
    if axis == "N":
        return [(int(n), config.m_elements) for n in values]
    raise ValueError(f"unknown sweep axis {vary!r}; expected M or N")


def execute_run(config, scheme, seed, n, m):
    """Run one (scheme, seed, scenario) cell and package every artifact."""
    system = config.system_config(scheme, n=n, m=m)
    ch = generate_channel_set(config.geometry, config.fading, n, m,
                              np.random.default_rng(channel_rng_key(seed, n, m)))
    started = time.perf_counter()
    if scheme == SCHEME_RANDOM:
        base = random_phases_baseline(
            ch, RunConfig(system=system, meta=config.meta),
            np.random.default_rng(random_baseline_rng_key(seed)),
            trials=config.random_trials)
        wall = time.perf_counter() - started
        r1, r2, total, residuals = score_solution(base.solution, ch, system)
        row = ResultRow(
            run_id=run_id_for(scheme, n, m, seed), scheme=scheme, seed=seed,
            n_antennas=n, m_elements=m, n_groups=len(system.group_sizes),
            best_sum_rate=total, rate_ue1=r1, rate_ue2=r2,
            initial_sum_rate=total, max_residual=residuals.max_feasibility_violation(),
            epochs_run=0, status="ok", wall_time_seconds=wall)
        return RunRecord(row=row, epoch_rows=[],
                         archive=_solution_archive(ch, base.solution, system,
                                                   total, r1, r2))
    result = run_meta_training(ch, RunConfig(system=system, meta=config.meta),
                               np.random.default_rng(training_rng_key(seed)))
    wall = time.perf_counter() - started
    sol = result.best_solution
    row = ResultRow(
        run_id=run_id_for(scheme, n, m, seed), scheme=scheme, seed=seed,
        n_antennas=n, m_elements=m, n_groups=len(system.group_sizes),
        best_sum_rate=result.projected_sum_rate, rate_ue1=result.rate_ue1,
        rate_ue2=result.rate_ue2, initial_sum_rate=result.initial_sum_rate,
        max_residual=result.constraint_report.max_feasibility_violation(),
        epochs_run=result.epochs_run, status=result.status,
        wall_time_seconds=wall)
    epoch_rows = [(log.epoch, log.mean_loss, log.best_sum_rate, log.rate_term,
                   log.threshold_term, log.norm_term, log.surface_term,
                   log.power_term) for log in result.per_epoch]
    return RunRecord(row=row, epoch_rows=epoch_rows,
                     archive=_solution_archive(ch, sol, system,
                                               result.projected_sum_rate,
                                               result.rate_ue1, result.rate_ue2))


def _solution_archive(ch, sol, system, best_sum_rate, r1, r2):
    """Arrays that make a run re-scorable with the system model alone."""
    scattering = sol.scattering
    if hasattr(scattering, "realize"):
        scattering = scattering.realize().data
    return {
        "ue1_bs": ch.ue1_bs, "ue2_bs": ch.ue2_bs, "ris_bs": ch.ris_bs,
        "ue1_ris": ch.ue1_ris, "ue2_ris": ch.ue2_ris,
        "w11": np.asarray(sol.w11), "w12": np.asarray(sol.w12),
        "w2": np.asarray(sol.w2), "powers": np.asarray(sol.powers),
        "scattering": np.asarray(scattering),
        "group_sizes": np.asarray(system.group_sizes, dtype=np.int64),
        "architecture": np.str_(system.architecture.value),
        "max_power_ue1_w": np.float64(system.max_power_ue1_w),
        "max_power_ue2_w": np.float64(system.max_power_ue2_w),
        "rate_threshold_ue1": np.float64(system.rate_threshold_ue1),
        "rate_threshold_ue2": np.float64(system.rate_threshold_ue2),
        "noise_power_w": np.float64(system.noise_power_w),
        "best_sum_rate": np.float64(best_sum_rate),
        "rate_ue1": np.float64(r1), "rate_ue2": np.float64(r2),
    }


def rescore_archive(archive):
    """(rate_ue1, rate_ue2, sum_rate, residuals) recomputed from a stored
    run archive using only the system model."""
    arch = Architecture(str(archive["architecture"]))
    group_sizes = tuple(int(g) for g in np.asarray(archive["group_sizes"]))
    system = SystemConfig(
        n_antennas=int(np.asarray(archive["ris_bs"]).shape[0]),
        m_elements=int(np.asarray(archive["ris_bs"]).shape[1]),
        architecture=arch, group_sizes=group_sizes,
        max_power_ue1_w=float(archive["max_power_ue1_w"]),
        max_power_ue2_w=float(archive["max_power_ue2_w"]),
        rate_threshold_ue1=float(archive["rate_threshold_ue1"]),
        rate_threshold_ue2=float(archive["rate_threshold_ue2"]),
        noise_power_w=float(archive["noise_power_w"]))
    ch = ChannelSet(ue1_bs=np.asarray(archive["ue1_bs"]),
                    ue2_bs=np.asarray(archive["ue2_bs"]),
                    ris_bs=np.asarray(archive["ris_bs"]),
                    ue1_ris=np.asarray(archive["ue1_ris"]),
                    ue2_ris=np.asarray(archive["ue2_ris"]))
    sol = Solution(w11=np.asarray(archive["w11"]), w12=np.asarray(archive["w12"]),
                   w2=np.asarray(archive["w2"]), powers=np.asarray(archive["powers"]),
                   scattering=np.asarray(archive["scattering"]))
    return score_solution(sol, ch, system)


def _worker(args):
    return execute_run(*args)


def max_workers():
    env = os.environ.get(MAX_WORKERS_ENV, "").strip()
    if env:
        cap = int(env)
        if cap < 1:
            raise ValueError(f"{MAX_WORKERS_ENV} must be at least 1, got {cap}")
        return cap
    return os.cpu_count() or 1


def run_sweep(config, vary=None, values=None, progress=None):
    """Execute scenario x scheme x seed, sorted deterministically.

    Worker count is capped by the environment variable named by
    MAX_WORKERS_ENV; a single worker runs everything in-process.
    Meta-training divergence is recorded in the affected row and the
    sweep continues.
    """
    tasks = [(config, scheme, seed, n, m)
             for (n, m) in sweep_points(config, vary, values)
             for scheme in config.schemes
             for seed in config.seeds]
    workers = min(max_workers(), len(tasks))
    if workers <= 1:
        records = []
        for task in tasks:
            records.append(_worker(task))
            if progress:
                progress(records[-1].row)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = []
            for record in pool.map(_worker, tasks, chunksize=1):
                records.append(record)
                if progress:
                    progress(record.row)
    records.sort(key=lambda rec: (rec.row.scheme, rec.row.n_antennas,
                                  rec.row.m_elements, rec.row.seed))
    return SweepResult(records=records)


# -- emission ------------------------------------------------------------------

def emit_results(sweep, out_dir, config, metadata_notes=()):
    """Write results.csv, run_metadata.cfg, per-run epoch CSVs and archives.

    Returns the paths written. Float cells carry 17 significant digits so
    a re-parse reproduces the in-memory values exactly.
    """
    if not sweep.records:
        raise ValueError("nothing to emit: the sweep produced no rows")
    out = Path(out_dir)
    (out / "epochs").mkdir(parents=True, exist_ok=True)
    (out / "solutions").mkdir(parents=True, exist_ok=True)

    results_path = out / "results.csv"
    with results_path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        for rec in sweep.records:
            writer.writerow(rec.row.csv_values())

    metadata_path = out / "run_metadata.cfg"
    header = ["experiment metadata: fully resolved configuration",
              f"format version {CONFIG_VERSION}", *metadata_notes]
    write_config(config, metadata_path, header=header)

    paths = [results_path, metadata_path]
    for rec in sweep.records:
        epoch_path = out / "epochs" / f"{rec.row.run_id}.csv"
        with epoch_path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(EPOCH_COLUMNS)
            for values in rec.epoch_rows:
                writer.writerow([values[0]] + [f"{v:.16e}" for v in values[1:]])
        archive_path = out / "solutions" / f"{rec.row.run_id}.npz"
        np.savez(archive_path, **rec.archive)
        paths.extend([epoch_path, archive_path])
    return paths


# -- oracle comparison ---------------------------------------------------------

@dataclass(frozen=True)
class OracleRow:
    seed: int
    meta_sum_rate: float
    oracle_sum_rate: float
    oracle_evaluations: int

    @property
    def ratio(self):
        return self.meta_sum_rate / self.oracle_sum_rate


def run_oracle_comparison(config):
    """Meta-learned diagonal optimizer vs exhaustive phase grid, per seed.

    Requires a scenario the oracle can enumerate (diagonal, at most two
    elements).
    """
    rows = []
    for seed in config.seeds:
        system = config.system_config(SCHEME_DIAGONAL)
        ch = generate_channel_set(
            config.geometry, config.fading, config.n_antennas, config.m_elements,
            np.random.default_rng(channel_rng_key(seed, config.n_antennas,
                                                  config.m_elements)))
        run_cfg = RunConfig(system=system, meta=config.meta)
        result = run_meta_training(ch, run_cfg,
                                   np.random.default_rng(training_rng_key(seed)))
        oracle = grid_oracle_tiny(ch, run_cfg, levels=config.oracle_levels)
        rows.append(OracleRow(seed=seed, meta_sum_rate=result.projected_sum_rate,
                              oracle_sum_rate=oracle.sum_rate,
                              oracle_evaluations=oracle.evaluations))
    return rows


def emit_oracle_results(rows, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "oracle.csv"
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("seed", "meta_sum_rate", "oracle_sum_rate",
                         "ratio", "oracle_evaluations"))
        for row in rows:
            writer.writerow([row.seed, f"{row.meta_sum_rate:.16e}",
                             f"{row.oracle_sum_rate:.16e}",
                             f"{row.ratio:.16e}", row.oracle_evaluations])
    return path
