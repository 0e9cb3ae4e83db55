"""Configured, seeded experiments and their CSV/JSON outputs.

A configuration is a JSON document::

    {"schema_version": 1, "experiment": "arrow", "seed": 7,
     "output_dir": "out", "params": {...}}

``params`` is validated against the experiment's schema (missing entries take
the schema defaults) before anything is computed. :func:`run` dispatches to
the experiment, writes its files and returns a :class:`RunRecord`.
"""

from __future__ import annotations

import copy
import csv
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import jsonschema
import numpy as np

from . import __version__
from . import caldeira_leggett as cl
from .dynamics import (
    NOT_REACHED,
    analytic_overlap,
    bath_initial_state,
    build_spin_bath,
    conditional_overlap,
    decoherence_time,
)
from .entropy import MacrostateDecomposition, factor_entropies, max_entanglement_entropy
from .errors import ConfigError, EntArrowError, IoError, UsageError
from .factorizations import (
    EphSpec,
    Factorization,
    FullUnitary,
    QubitPermutations,
    SingleFactorization,
    SpatialBlocks,
    check_eph,
)
from .hilbert import HilbertSpace, PhysicalConstants, PureState, haar_sample, haar_vector, ket

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
EXPERIMENTS = ("arrow", "cl", "typicality", "eph")
HIGH_FRACTION = 0.9
LOW_FRACTION = 0.1

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}

PARAM_SCHEMAS: dict[str, dict] = {
    "arrow": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "n_env": {"type": "integer", "minimum": 1, "maximum": 11, "default": 8},
            "coupling_range": {
                "type": "array",
                "items": _POSITIVE,
                "minItems": 2,
                "maxItems": 2,
                "default": [0.5, 1.5],
            },
            "t_max": {**_POSITIVE, "default": 3.0},
            "n_times": {"type": "integer", "minimum": 2, "default": 61},
            "threshold": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1, "default": 0.05},
        },
    },
    "cl": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "n_points": {"type": "integer", "minimum": 16, "default": 128},
            "half_width": {**_POSITIVE, "default": 5.0},
            "M": {**_POSITIVE, "default": 1.0},
            "gamma": {"type": "number", "minimum": 0, "default": 1.0},
            "T": {**_POSITIVE, "default": 48.0},
            "omega": {**_POSITIVE, "default": 1.0},
            "hbar": {**_POSITIVE, "default": 1.0},
            "k_B": {**_POSITIVE, "default": 1.0},
            "initial": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "kind": {"enum": ["ground", "gaussian", "cat"], "default": "ground"},
                    "center": {**_NUMBER, "default": 0.0},
                    "centers": {"type": "array", "items": _NUMBER, "default": [-1.5, 1.5]},
                    "width": {**_POSITIVE, "default": 0.5},
                    "momentum": {**_NUMBER, "default": 0.0},
                },
                "default": {},
            },
            "terms": {
                "type": "array",
                "items": {"enum": sorted(cl.ALL_TERMS)},
                "minItems": 1,
                "uniqueItems": True,
                "default": sorted(cl.ALL_TERMS),
            },
            "t_final": {**_POSITIVE, "default": 0.02},
            "dt": {"type": ["number", "null"], "exclusiveMinimum": 0, "default": None},
            "separation": {**_POSITIVE, "default": 1.0},
            "n_samples": {"type": "integer", "minimum": 3, "default": 101},
            "snapshot_times": {"type": "array", "items": _NUMBER, "default": []},
        },
    },
    "typicality": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "dim_a": {"type": "integer", "minimum": 1, "default": 2},
            "dim_b": {"type": "integer", "minimum": 1, "default": 16},
            "n_samples": {"type": "integer", "minimum": 100, "default": 10000},
            "restriction": {
                "type": ["array", "null"],
                "items": {"type": "integer", "minimum": 0},
                "default": None,
            },
        },
    },
    "eph": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "state": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "kind": {"enum": ["example", "product", "haar"], "default": "example"},
                    "dims": {"type": "array", "items": {"type": "integer", "minimum": 1}, "default": [2, 2, 2]},
                },
                "default": {},
            },
            "variant": {"enum": ["EPH_m", "EPH_0", "EPH_0R", "EPH_leq_m", "EPH_leq_mR"], "default": "EPH_0"},
            "m": {"type": "number", "minimum": 0, "default": 0.0},
            "tol": {**_POSITIVE, "default": 1e-9},
            "class": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "kind": {
                        "enum": ["full_unitary", "qubit_permutations", "spatial_blocks", "single"],
                        "default": "full_unitary",
                    },
                    "dims": {"type": "array", "items": {"type": "integer", "minimum": 1}, "default": [2, 2, 2]},
                    "groups": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
                    "block_size": {"type": "integer", "minimum": 1, "default": 1},
                    "offsets": {"type": "boolean", "default": False},
                    "restarts": {"type": "integer", "minimum": 1, "default": 8},
                    "max_iter": {"type": "integer", "minimum": 1, "default": 2000},
                    "search_tol": {**_POSITIVE, "default": 1e-8},
                },
                "default": {},
            },
        },
    },
}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION, "default": SCHEMA_VERSION},
        "experiment": {"enum": list(EXPERIMENTS)},
        "seed": {"type": "integer", "minimum": 0, "default": 0},
        "output_dir": {"type": "string", "default": "out"},
        "params": {"type": "object", "default": {}},
    },
}


def _fill_defaults(doc: dict, schema: dict) -> dict:
    out = dict(doc)
    for key, sub in schema.get("properties", {}).items():
        if key not in out and "default" in sub:
            out[key] = copy.deepcopy(sub["default"])
        if sub.get("type") == "object" and isinstance(out.get(key), dict):
            out[key] = _fill_defaults(out[key], sub)
    return out


def _validate(doc, schema, prefix: str):
    validator = jsonschema.Draft7Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        err = errors[0]
        parts = ([prefix] if prefix else []) + [str(p) for p in err.absolute_path]
        raise ConfigError(err.message, ".".join(parts))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    params: dict
    output_dir: str = "out"

    @classmethod
    def from_dict(cls, doc: Any) -> "ExperimentConfig":
        """Validate ``doc`` and fill schema defaults.

        Raises
        ------
        ConfigError
            With the dotted path of the first offending field.
        """
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        if doc.get("experiment") not in EXPERIMENTS and "experiment" in doc:
            raise ConfigError(f"unknown experiment {doc['experiment']!r}", "experiment")
        _validate(doc, CONFIG_SCHEMA, "")
        doc = _fill_defaults(doc, CONFIG_SCHEMA)
        schema = PARAM_SCHEMAS[doc["experiment"]]
        params = doc["params"]
        _validate(params, schema, "params")
        params = _fill_defaults(params, schema)
        return cls(doc["experiment"], doc["seed"], params, doc["output_dir"])

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "params": self.params,
        }


@dataclass
class Table:
    columns: list[str]
    rows: list[list]


@dataclass
class RunRecord:
    """Everything an experiment produced.

    ``duration`` is wall-clock seconds; it is kept in memory and logged but
    left out of the exported files so reruns are byte-identical.
    """

    config: ExperimentConfig
    version: str
    duration: float = 0.0
    tables: dict[str, Table] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    verdicts: list[dict] = field(default_factory=list)

    @property
    def stem(self) -> str:
        return f"{self.config.experiment}_{self.config.seed}"


@dataclass(frozen=True)
class TypicalityStats:
    n_samples: int
    mean: float
    variance: float
    min: float
    max: float
    fraction_below: float
    fraction_above: float
    low_threshold: float
    high_threshold: float
    max_possible: float
    restriction_dim: int | None = None

    @property
    def standard_error(self) -> float:
        return math.sqrt(self.variance / self.n_samples)

    @property
    def mean_single_side(self) -> float:
        """Mean entropy of one side; the bipartite sum counts both equal sides."""
        return self.mean / 2

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["standard_error"] = self.standard_error
        out["mean_single_side"] = self.mean_single_side
        return out


def typicality_samples(
    dim_a: int,
    dim_b: int,
    n_samples: int,
    seed: int,
    restriction: tuple[MacrostateDecomposition, int] | None = None,
) -> np.ndarray:
    """Bipartite entanglement entropy of ``n_samples`` Haar-random states.

    Sample ``i`` uses the generator seeded by ``(seed, i)``, so any subset of
    samples can be regenerated independently. With ``restriction = (D, k)``
    states are Haar-distributed inside macrostate ``k`` of ``D``.
    """
    dim = dim_a * dim_b
    basis = None
    if restriction is not None:
        decomposition, index = restriction
        if decomposition.dim != dim:
            raise UsageError("restriction dimension does not match dim_a * dim_b")
        basis = decomposition.basis(index)
        if basis.shape[1] < 2:
            raise UsageError("restriction subspace must have dimension at least 2")
    sub_dim = dim if basis is None else basis.shape[1]
    vecs = np.empty((n_samples, dim), dtype=complex)
    for i in range(n_samples):
        v = haar_vector(sub_dim, np.random.default_rng([seed, i]))
        vecs[i] = v if basis is None else basis @ v
    return factor_entropies(vecs, (dim_a, dim_b)).sum(axis=-1)


def typicality(
    dim_a: int,
    dim_b: int,
    n_samples: int,
    seed: int,
    restriction: tuple[MacrostateDecomposition, int] | None = None,
) -> TypicalityStats:
    """Statistics of the entanglement entropy ``S_A + S_B`` over Haar samples.

    Thresholds for "near product" and "highly entangled" are fixed fractions
    (``LOW_FRACTION``, ``HIGH_FRACTION``) of the maximum ``2 log min(dim_a, dim_b)``.
    """
    if n_samples < 100:
        raise UsageError("n_samples must be at least 100")
    s = typicality_samples(dim_a, dim_b, n_samples, seed, restriction)
    rdim = None if restriction is None else restriction[0].rank(restriction[1])
    return summarize_samples(s, dim_a, dim_b, rdim)


def summarize_samples(s: np.ndarray, dim_a: int, dim_b: int, restriction_dim: int | None = None) -> TypicalityStats:
    """Reduce an array of entanglement entropies to :class:`TypicalityStats`."""
    top = max_entanglement_entropy((dim_a, dim_b))
    low, high = LOW_FRACTION * top, HIGH_FRACTION * top
    return TypicalityStats(
        n_samples=int(s.size),
        mean=float(s.mean()),
        variance=float(s.var(ddof=1)),
        min=float(s.min()),
        max=float(s.max()),
        fraction_below=float(np.mean(s < low)),
        fraction_above=float(np.mean(s >= high)),
        low_threshold=low,
        high_threshold=high,
        max_possible=top,
        restriction_dim=restriction_dim,
    )


# --- experiments --------------------------------------------------------------------


def _arrow(cfg: ExperimentConfig, record: RunRecord):
    p = cfg.params
    model, H = build_spin_bath(p["n_env"], tuple(p["coupling_range"]), cfg.seed)
    psi0 = bath_initial_state(model.n_env)
    dims = (2, 2**model.n_env)
    times = np.linspace(0.0, p["t_max"], p["n_times"])
    rows, r_series = [], []
    for t in times:
        vec = H.propagate(psi0.amplitudes, t)
        r = conditional_overlap(vec)
        s_ent = float(factor_entropies(vec, dims).sum())
        rows.append([float(t), r.real, r.imag, abs(r), s_ent])
        r_series.append((float(t), r))
    analytic = analytic_overlap(model.couplings, times)
    forward = H.propagate(psi0.amplitudes, p["t_max"])
    back = H.propagate(forward, -p["t_max"])
    t_dec = decoherence_time(r_series, p["threshold"])
    record.tables["overlap"] = Table(["t", "re_r", "im_r", "abs_r", "s_ent"], rows)
    record.summary.update(
        {
            "couplings": list(model.couplings),
            "decoherence_time": None if t_dec is NOT_REACHED else t_dec,
            "max_s_ent": max(r[4] for r in rows),
            "analytic_overlap_max_error": float(np.max(np.abs(np.array([r[3] for r in rows]) - np.abs(analytic)))),
            "reversal_state_error": float(np.linalg.norm(back - psi0.amplitudes)),
            "reversal_s_ent": float(factor_entropies(back, dims).sum()),
        }
    )


def _cl(cfg: ExperimentConfig, record: RunRecord):
    p = cfg.params
    constants = PhysicalConstants(p["hbar"], p["k_B"])
    params = cl.CLParameters(p["M"], p["gamma"], p["T"], p["omega"], constants)
    grid = cl.PositionGrid.spanning(p["half_width"], p["n_points"])
    init = p["initial"]
    if init["kind"] == "ground":
        rho0 = cl.ground_state(grid, params)
    elif init["kind"] == "gaussian":
        rho0 = cl.gaussian_state(grid, init["center"], init["width"], init["momentum"], constants.hbar)
    else:
        rho0 = cl.cat_state(grid, tuple(init["centers"]), init["width"], init["momentum"], constants.hbar)
    terms = frozenset(p["terms"])
    dt = p["dt"] if p["dt"] is not None else cl.stable_dt(grid, params, terms)
    n_steps = max(1, math.ceil(p["t_final"] / dt - 1e-9))
    every = max(1, n_steps // (p["n_samples"] - 1))
    traj = cl.integrate(rho0, params, p["t_final"], dt, terms, save_every=every)
    s = grid.offset(p["separation"]) * grid.spacing
    coherence = cl.coherence_series(traj, s)
    min_eigs = [cl.positivity_min_eig(st) for st in traj]
    record.tables["coherence"] = Table(
        ["t", "coherence", "min_eig", "trace"],
        [[st.t, float(c), m, st.trace] for st, c, m in zip(traj, coherence, min_eigs)],
    )
    if p["snapshot_times"]:
        x = grid.x
        rows = []
        for want in p["snapshot_times"]:
            st = min(traj, key=lambda q: abs(q.t - want))
            for i in range(grid.n_points):
                for j in range(grid.n_points):
                    v = st.rho[i, j]
                    rows.append([st.t, float(x[i]), float(x[j]), float(v.real), float(v.imag)])
        record.tables["snapshots"] = Table(["t", "x", "y", "re_rho", "im_rho"], rows)
    summary = {
        "separation": s,
        "dt": dt,
        "predicted_ratio": params.timescale_ratio(s),
        "min_eig": min(min_eigs),
        "min_eig_series": min_eigs,
    }
    try:
        ts = cl.timescales(traj, params, s)
        summary.update(tau_d=ts.tau_d, tau_r=ts.tau_r, ratio=ts.ratio, dissipation_first=ts.dissipation_first)
    except cl.FitError as exc:
        summary.update(tau_d=None, tau_r=None, ratio=None, fit_error=str(exc))
    record.summary.update(summary)


def _typicality(cfg: ExperimentConfig, record: RunRecord):
    p = cfg.params
    dim = p["dim_a"] * p["dim_b"]
    restriction = None
    if p["restriction"] is not None:
        inside = sorted(set(p["restriction"]))
        if inside[-1] >= dim:
            raise ConfigError("restriction index out of range", "params.restriction")
        outside = [i for i in range(dim) if i not in inside]
        blocks = [inside] + ([outside] if outside else [])
        restriction = (MacrostateDecomposition.from_blocks(dim, blocks), 0)
    samples = typicality_samples(p["dim_a"], p["dim_b"], p["n_samples"], cfg.seed, restriction)
    rdim = None if restriction is None else restriction[0].rank(0)
    stats = summarize_samples(samples, p["dim_a"], p["dim_b"], rdim)
    record.tables["samples"] = Table(["index", "s_ent"], [[i, float(v)] for i, v in enumerate(samples)])
    record.summary.update(stats.to_dict())


def _eph_state(spec: dict, seed: int) -> PureState:
    if spec["kind"] == "example":
        bell = (ket(0, 1).amplitudes + ket(1, 0).amplitudes) / math.sqrt(2)
        return PureState(np.kron(bell, [1, 0]), HilbertSpace((2, 2, 2)))
    dims = tuple(spec["dims"])
    dim = math.prod(dims)
    if spec["kind"] == "product":
        return PureState.basis(0, dims)
    return haar_sample(dim, seed, dims)


def _eph_class(spec: dict, psi: PureState, seed: int):
    kind = spec["kind"]
    dims = tuple(spec["dims"])
    if kind == "full_unitary":
        return FullUnitary(dims, spec["restarts"], spec["search_tol"], spec["max_iter"], seed)
    if kind == "qubit_permutations":
        return QubitPermutations(dims)
    if kind == "spatial_blocks":
        return SpatialBlocks(spec["block_size"], int(round(math.log2(psi.dim))), spec["offsets"])
    if "groups" in spec:
        return SingleFactorization(Factorization.from_qubit_groups(spec["groups"]))
    return SingleFactorization(Factorization.identity(dims))


def _eph(cfg: ExperimentConfig, record: RunRecord):
    p = cfg.params
    psi = _eph_state(p["state"], cfg.seed)
    fclass = _eph_class(p["class"], psi, cfg.seed)
    variant = p["variant"]
    if variant == "EPH_m":
        if not isinstance(fclass, SingleFactorization):
            raise ConfigError("EPH_m needs class.kind = 'single'", "params.class.kind")
        spec = EphSpec.eph_m(fclass.factorization, p["m"], p["tol"])
    else:
        spec = EphSpec(variant, m=p["m"], tol=p["tol"], cls=fclass)
    verdict = check_eph(psi, spec)
    record.verdicts.append(verdict.to_dict())
    record.summary.update({"status": verdict.status.value, "extremal_value": verdict.extremal_value})


_RUNNERS = {"arrow": _arrow, "cl": _cl, "typicality": _typicality, "eph": _eph}


def run(config: ExperimentConfig | dict, write: bool = True) -> RunRecord:
    """Execute an experiment and (by default) write its CSV and JSON files.

    Raises
    ------
    ConfigError
        For schema violations.
    EntArrowError
        Downstream failures, re-raised with the experiment name prefixed.
    """
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_dict(config)
    record = RunRecord(config, __version__)
    start = time.perf_counter()
    try:
        _RUNNERS[config.experiment](config, record)
    except ConfigError:
        raise
    except EntArrowError as exc:
        raise type(exc)(f"{config.experiment} experiment (seed {config.seed}): {exc}") from exc
    record.duration = time.perf_counter() - start
    log.info("%s finished in %.2f s", record.stem, record.duration)
    if write:
        export(record, "csv")
        export(record, "json")
    return record


# --- serialization -------------------------------------------------------------------


def format_float(value) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(value), ".17g")


def _cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format_float(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_csv(path, table: Table):
    import io

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_cell(v) for v in row])
    _write(Path(path), buf.getvalue())


def read_csv(path) -> Table:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [[float(v) for v in row] for row in reader]
    return Table(columns, rows)


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def export(record: RunRecord, fmt: str, out_dir: str | os.PathLike | None = None) -> list[Path]:
    """Write a record's tables (``csv``) or summary, verdicts and config echo (``json``).

    File names are ``<experiment>_<seed>_<part>.<ext>``.
    """
    out = Path(out_dir if out_dir is not None else record.config.output_dir)
    written = []
    if fmt == "csv":
        for name, table in record.tables.items():
            path = out / f"{record.stem}_{name}.csv"
            write_csv(path, table)
            written.append(path)
    elif fmt == "json":
        summary = {
            "schema_version": SCHEMA_VERSION,
            "experiment": record.config.experiment,
            "seed": record.config.seed,
            "code_version": record.version,
            "summary": record.summary,
        }
        parts = {"summary": summary, "config": record.config.to_dict()}
        if record.verdicts:
            parts["verdict"] = record.verdicts[0] if len(record.verdicts) == 1 else record.verdicts
        for name, payload in parts.items():
            path = out / f"{record.stem}_{name}.json"
            _write(path, dump_json(payload))
            written.append(path)
    else:
        raise UsageError(f"unknown export format {fmt!r}")
    return written
