"""Experiment harness: runtime/codelength grids, bias-vs-slack grids, the
mode sweep, Monte-Carlo shrinkage verification, and the k-NN divergence
estimator that scores encoded batches.

Everything is driven by an :class:`ExperimentConfig` (JSON-loadable) and
emits :class:`ResultRow` records with a fixed CSV schema. Runs are fully
deterministic: every trial's stream seed is derived from the config seed
and the trial's position, and rows are sorted before writing, so a given
config always produces byte-identical CSV.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .coders import encode_astar, encode_dad, encode_mrc, encode_pfr
from .distributions import (
    Distribution1D,
    MixtureComponent,
    PairSpec,
    Uniform,
    UniformMixture,
    Gaussian,
)
from .errors import DomainError, RecError
from .isokl import gaussian_from_kl_dinf, uniform_from_mean_kl
from .randomness import derive_seed
from .tree import PartitionKind, expand, make_root

_LN2 = math.log(2.0)

CSV_COLUMNS = (
    "algorithm",
    "family",
    "d_kl_nats",
    "d_inf_nats",
    "n_modes",
    "t_extra_bits",
    "trial_index",
    "steps",
    "depth",
    "payload_bits",
    "kl_bias_estimate",
    "error",
)

PFR_DINF_CEILING = 7.0  # nats; expected arrivals e^7 ~ 1100 per trial


@dataclass(frozen=True)
class ResultRow:
    algorithm: str
    family: str
    d_kl_nats: float
    d_inf_nats: float
    n_modes: int | None = None
    t_extra_bits: int | None = None
    trial_index: int = 0
    steps: float | None = None
    depth: int | None = None
    payload_bits: int | None = None
    kl_bias_estimate: float | None = None
    error: str | None = None

    def as_record(self) -> list[str]:
        def fmt(v) -> str:
            if v is None:
                return ""
            if isinstance(v, float):
                return repr(v)
            return str(v)

        return [fmt(getattr(self, c)) for c in CSV_COLUMNS]


@dataclass(frozen=True)
class ExperimentConfig:
    """Grids and knobs for one harness run.

    Gaussian cells are (kl_nats, dinf_nats) pairs realized exactly through
    the joint KL/D-infinity inversion; uniform cells are kl values inside
    a fixed uniform prior; mixture cells hold a mode count at a shared
    dinf. ``extra_bits``/``repeats``/``batch`` only matter to the bias
    grid.
    """

    algorithms: tuple[str, ...]
    trials: int
    seed: int
    gaussian_cells: tuple[tuple[float, float], ...] = ()
    uniform_cells: tuple[float, ...] = ()
    mixture_cells: tuple[tuple[int, float], ...] = ()
    extra_bits: tuple[int, ...] = (0, 1, 2, 3, 4)
    repeats: int = 50
    batch: int = 100
    max_steps: int = 1_000_000
    output: str | None = None

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if not (self.gaussian_cells or self.uniform_cells or self.mixture_cells):
            raise DomainError("config needs at least one grid cell")
        unknown = set(self.algorithms) - {"as", "ad", "pfr", "dad", "mrc"}
        if unknown:
            raise DomainError(f"unknown algorithms {sorted(unknown)}")
        for name in ("algorithms", "gaussian_cells", "uniform_cells",
                     "mixture_cells", "extra_bits"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        try:
            return ExperimentConfig(
                algorithms=tuple(data.get("algorithms", ("as", "ad", "pfr"))),
                trials=int(data["trials"]),
                seed=int(data["seed"]),
                gaussian_cells=tuple(
                    (float(c["kl_nats"]), float(c["dinf_nats"]))
                    for c in data.get("gaussian_cells", ())
                ),
                uniform_cells=tuple(
                    float(c["kl_nats"]) for c in data.get("uniform_cells", ())
                ),
                mixture_cells=tuple(
                    (int(c["n_modes"]), float(c["dinf_nats"]))
                    for c in data.get("mixture_cells", ())
                ),
                extra_bits=tuple(data.get("extra_bits", (0, 1, 2, 3, 4))),
                repeats=int(data.get("repeats", 50)),
                batch=int(data.get("batch", 100)),
                max_steps=int(data.get("max_steps", 1_000_000)),
                output=data.get("output"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"bad experiment config: {exc}") from None

    @staticmethod
    def from_json(text: str) -> "ExperimentConfig":
        return ExperimentConfig.from_dict(json.loads(text))


# -- cell construction -------------------------------------------------------

_UNIFORM_PRIOR = Uniform(0.0, 2.0)
_UNIFORM_BETA = 0.5


@dataclass(frozen=True)
class _Cell:
    family: str
    pair: PairSpec
    kl: float
    dinf: float
    n_modes: int | None = None


def mixture_pair(n_modes: int, dinf: float) -> PairSpec:
    """Equal-mass disjoint uniform components spread inside Uniform(0.5, 1).

    Every component has density ratio e^dinf, so KL = D-infinity = dinf
    no matter how many modes there are; only the search geometry changes.
    """
    if n_modes < 1:
        raise DomainError(f"need at least one mode, got {n_modes}")
    if dinf <= 0.0:
        raise DomainError(f"mode sweep needs dinf > 0, got {dinf}")
    length = math.exp(-dinf) / n_modes
    comps = []
    for i in range(n_modes):
        center = (i + 0.5) / n_modes
        comps.append(
            MixtureComponent(1.0 / n_modes, center - length / 2, center + length / 2)
        )
    return PairSpec(UniformMixture(tuple(comps)), Uniform(0.5, 1.0))


def _cells_for(config: ExperimentConfig, *, mixtures_only: bool = False) -> list[_Cell]:
    cells: list[_Cell] = []
    if not mixtures_only:
        for kl, dinf in config.gaussian_cells:
            mean, variance = gaussian_from_kl_dinf(kl, dinf)
            pair = PairSpec(Gaussian(mean, variance), Gaussian(0.0, 1.0))
            cells.append(_Cell("gaussian", pair, kl, dinf))
        for kl in config.uniform_cells:
            target = uniform_from_mean_kl(
                _UNIFORM_PRIOR.center, _UNIFORM_PRIOR.width, kl, _UNIFORM_BETA
            )
            pair = PairSpec(target, _UNIFORM_PRIOR)
            cells.append(_Cell("uniform", pair, kl, kl))
    for n_modes, dinf in config.mixture_cells:
        pair = mixture_pair(n_modes, dinf)
        cells.append(_Cell("uniform_mixture", pair, dinf, dinf, n_modes))
    return cells


# -- the k-NN divergence estimator -------------------------------------------


def knn_kl_estimate(
    samples_p: Sequence[float], samples_q: Sequence[float], k: int = 1
) -> float:
    """1-D k-nearest-neighbour estimate of KL(P-hat || Q-hat) in nats.

    (1/n) sum log(nu_k / rho_k) + log(m / (n - 1)), with rho_k the k-NN
    distance within samples_p (self excluded) and nu_k the k-NN distance
    into samples_q. The estimate is not sign-constrained. Duplicate
    values would produce zero distances; they are perturbed by
    index-proportional 1e-12 offsets (with a warning) before querying.
    """
    x = np.asarray(samples_p, dtype=float)
    y = np.asarray(samples_q, dtype=float)
    n, m = len(x), len(y)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if n < k + 2:
        raise DomainError(
            f"samples_p needs at least k+2 = {k + 2} points for a self-excluded "
            f"k-th neighbour, got {n}"
        )
    if m < k + 1:
        raise DomainError(f"samples_q needs at least k+1 = {k + 1} points, got {m}")
    if len(np.unique(np.concatenate([x, y]))) < n + m:
        warnings.warn(
            "duplicate sample values; applying index-proportional 1e-12 jitter",
            stacklevel=2,
        )
        x = x + 1e-12 * np.arange(n)
        y = y + 1e-12 * math.sqrt(2.0) * np.arange(m)
    rho = cKDTree(x[:, None]).query(x[:, None], k=k + 1)[0][:, k]
    nu = cKDTree(y[:, None]).query(x[:, None], k=k)[0]
    if k > 1:
        nu = nu[:, k - 1]
    return float(np.mean(np.log(nu / rho)) + math.log(m / (n - 1)))


# -- grids --------------------------------------------------------------------


def _trial_seed(config_seed: int, cell_idx: int, alg_idx: int, trial: int) -> int:
    return derive_seed(derive_seed(config_seed, (cell_idx << 8) | alg_idx), trial)


def run_runtime_grid(config: ExperimentConfig) -> list[ResultRow]:
    """One exact encode per (cell, algorithm, trial) with step counting.

    PFR is skipped above its tractability ceiling of 7 nats of
    D-infinity; per-trial failures become rows carrying an error flag.
    """
    rows: list[ResultRow] = []
    cells = _cells_for(config)
    for ci, cell in enumerate(cells):
        for ai, alg in enumerate(config.algorithms):
            if alg not in ("as", "ad", "pfr"):
                continue  # depth-limited coders have no exact-runtime cell
            if alg == "pfr" and cell.dinf > PFR_DINF_CEILING:
                continue
            for trial in range(config.trials):
                seed = _trial_seed(config.seed, ci, ai, trial)
                base = dict(
                    algorithm=alg,
                    family=cell.family,
                    d_kl_nats=cell.kl,
                    d_inf_nats=cell.dinf,
                    n_modes=cell.n_modes,
                    trial_index=trial,
                )
                try:
                    if alg == "as":
                        _, _, st = encode_astar(
                            cell.pair, PartitionKind.SAMPLE_SPLIT, seed,
                            max_steps=config.max_steps,
                        )
                    elif alg == "ad":
                        _, _, st = encode_astar(
                            cell.pair, PartitionKind.DYADIC, seed,
                            max_steps=config.max_steps,
                        )
                    else:
                        _, _, st = encode_pfr(cell.pair, seed, max_steps=config.max_steps)
                    rows.append(
                        ResultRow(
                            **base,
                            steps=st.steps,
                            depth=st.returned_depth,
                            payload_bits=st.payload_bits,
                        )
                    )
                except RecError as exc:
                    rows.append(ResultRow(**base, error=str(exc)))
    return rows


def run_mode_sweep(config: ExperimentConfig) -> list[ResultRow]:
    """Runtime grid over the mixture cells only, validating that every
    cell sits at the same D-infinity."""
    cells = _cells_for(config, mixtures_only=True)
    if not cells:
        raise DomainError("mode sweep needs mixture_cells")
    dinfs = {round(c.pair.analytic_dinf(), 9) for c in cells}
    if len(dinfs) != 1:
        raise DomainError(f"mode sweep cells must share one dinf, got {sorted(dinfs)}")
    mix_config = ExperimentConfig(
        algorithms=config.algorithms,
        trials=config.trials,
        seed=config.seed,
        mixture_cells=config.mixture_cells,
        max_steps=config.max_steps,
    )
    return run_runtime_grid(mix_config)


def _fresh_target_samples(target: Distribution1D, seed: int, count: int) -> list[float]:
    rng = np.random.Generator(np.random.PCG64(seed))
    return [target.inv_cdf(u) for u in rng.random(count)]


def run_bias_grid(config: ExperimentConfig) -> list[ResultRow]:
    """Bias of the depth-limited coders versus the extra-bit slack.

    Per (cell, t, repeat): encode a batch with DAD* and with MRC at the
    shared budget ceil(KL/ln2) + t, then score each batch against fresh
    target samples with the k-NN estimator. One row per (cell,
    algorithm, t, repeat) carrying the batch's mean steps and its bias
    estimate.

    Common random numbers: within a repeat, both coders at every budget
    reuse the same per-symbol seeds (their keyed streams are disjoint by
    slot) and are scored against the same fresh reference set, so
    bias comparisons across algorithms and across t are paired rather
    than compounding three sources of independent noise.
    """
    rows: list[ResultRow] = []
    cells = _cells_for(config)
    for ci, cell in enumerate(cells):
        base_bits = math.ceil(cell.kl / _LN2)
        for rep in range(config.repeats):
            enc_base = _trial_seed(config.seed, ci, 0xE0, rep)
            fresh = _fresh_target_samples(
                cell.pair.target,
                _trial_seed(config.seed, ci, 0xF0, rep),
                config.batch,
            )
            for t in config.extra_bits:
                budget = base_bits + t
                if budget < 1:
                    budget = 1
                for alg in ("dad", "mrc"):
                    if alg not in config.algorithms:
                        continue
                    base = dict(
                        algorithm=alg,
                        family=cell.family,
                        d_kl_nats=cell.kl,
                        d_inf_nats=cell.dinf,
                        n_modes=cell.n_modes,
                        t_extra_bits=t,
                        trial_index=rep,
                    )
                    try:
                        encoded: list[float] = []
                        steps = 0
                        for b in range(config.batch):
                            seed = derive_seed(enc_base, b)
                            if alg == "dad":
                                _, x, st = encode_dad(cell.pair, seed, budget)
                            else:
                                _, x, st = encode_mrc(cell.pair, seed, budget)
                            encoded.append(x)
                            steps += st.steps
                        bias = knn_kl_estimate(encoded, fresh)
                        rows.append(
                            ResultRow(
                                **base,
                                steps=steps / config.batch,
                                depth=budget,
                                payload_bits=budget,
                                kl_bias_estimate=bias,
                            )
                        )
                    except RecError as exc:
                        rows.append(ResultRow(**base, error=str(exc)))
    return rows


# -- shrinkage verification ----------------------------------------------------


@dataclass(frozen=True)
class ShrinkageReport:
    kind: PartitionKind
    depths: tuple[int, ...]
    mean_mass: tuple[float, ...]
    bounds: tuple[float, ...]
    passed: bool


def verify_shrinkage(
    kind: PartitionKind,
    depth_max: int = 10,
    trials: int = 2000,
    seed: int = 20260817,
) -> ShrinkageReport:
    """Monte-Carlo check of region-mass shrinkage along worst-case descents.

    Descends into the larger-mass child at every level (the binding case
    for the 3/4 rate of sample splitting) and compares the per-depth mean
    mass against (3/4)^(d-1) + 3 SE; the dyadic rule must halve exactly,
    so its masses are compared to 2^-(d-1) directly.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    proposal = Gaussian(0.0, 1.0)
    masses = np.ones((trials, depth_max))
    for trial in range(trials):
        node = make_root(proposal, derive_seed(seed, trial))
        for d in range(1, depth_max):
            children = expand(node, kind, proposal, derive_seed(seed, trial))
            if not children:
                break
            node = max(children, key=lambda c: c.mass)
            masses[trial, d] = node.mass
    depths = tuple(range(1, depth_max + 1))
    mean_mass = tuple(float(np.mean(masses[:, d - 1])) for d in depths)
    if kind is PartitionKind.DYADIC or kind is PartitionKind.GLOBAL_BOUND:
        bounds = tuple(
            1.0 if kind is PartitionKind.GLOBAL_BOUND else 2.0 ** -(d - 1)
            for d in depths
        )
        passed = all(
            bool(np.all(masses[:, d - 1] == bounds[d - 1])) for d in depths
        )
    else:
        bound_list = []
        passed = True
        for d in depths:
            col = masses[:, d - 1]
            se = float(np.std(col, ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
            bound = 0.75 ** (d - 1) + 3.0 * se
            bound_list.append(bound)
            if mean_mass[d - 1] > bound:
                passed = False
        bounds = tuple(bound_list)
    return ShrinkageReport(kind, depths, mean_mass, bounds, passed)


# -- CSV ------------------------------------------------------------------------


def rows_to_csv(rows: Iterable[ResultRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in sorted(
        rows,
        key=lambda r: (
            r.algorithm, r.family, r.d_kl_nats, r.d_inf_nats,
            r.n_modes if r.n_modes is not None else -1,
            r.t_extra_bits if r.t_extra_bits is not None else -1,
            r.trial_index,
        ),
    ):
        writer.writerow(row.as_record())
    return buf.getvalue()


def write_rows(rows: Iterable[ResultRow], path: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(rows_to_csv(rows))


def summarize_rows(rows: Iterable[ResultRow]) -> list[dict]:
    """Per-cell mean and quartiles of steps / payload bits (and bias when
    present), mirroring how the grids are usually plotted."""
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        if row.error is not None:
            continue
        key = (row.algorithm, row.family, row.d_kl_nats, row.d_inf_nats,
               row.n_modes, row.t_extra_bits)
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(p) for p in k)):
        rows_g = groups[key]
        steps = np.array([r.steps for r in rows_g], dtype=float)
        entry = {
            "algorithm": key[0],
            "family": key[1],
            "d_kl_nats": key[2],
            "d_inf_nats": key[3],
            "n_modes": key[4],
            "t_extra_bits": key[5],
            "trials": len(rows_g),
            "steps_mean": float(np.mean(steps)),
            "steps_q1": float(np.quantile(steps, 0.25)),
            "steps_median": float(np.quantile(steps, 0.5)),
            "steps_q3": float(np.quantile(steps, 0.75)),
        }
        bits = np.array(
            [r.payload_bits for r in rows_g if r.payload_bits is not None], dtype=float
        )
        if len(bits):
            entry["payload_bits_mean"] = float(np.mean(bits))
        biases = np.array(
            [r.kl_bias_estimate for r in rows_g if r.kl_bias_estimate is not None],
            dtype=float,
        )
        if len(biases):
            entry["bias_mean"] = float(np.mean(biases))
            entry["bias_se"] = (
                float(np.std(biases, ddof=1) / math.sqrt(len(biases)))
                if len(biases) > 1 else 0.0
            )
        out.append(entry)
    return out
