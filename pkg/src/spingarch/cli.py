"""Command-line front end: CSV ingestion, the five workflows, serialization.

Subcommands: `simulate`, `fit`, `moments`, `study`, `diagnose`, `forecast`.
Every run is fully determined by its flags and input file -- no clocks, no
hidden state -- so rerunning a command reproduces its outputs byte for byte.
Exit codes: 0 ok, 1 usage, 2 parse, 3 numeric, 4 non-convergence (the fit
document is still written).
"""

from __future__ import annotations

import argparse
import csv
import math
import re
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from .data import CountSeries
from .diagnostics import (
    cumulative_periodogram,
    one_step_forecasts,
    pearson_residuals,
    rmse,
    sample_acf,
    sample_pacf,
)
from .distributions import RngStream
from .estimate import FitResult, OptimizerOptions, fit_cml
from .exceptions import DataError, NumericError, ParameterError
from .model import NEGBIN, NEURAL, POISSON, SOFTPLUS_LINEAR, LinearParams, ModelSpec
from .neural import NeuralWeights, fit_neural, weights_from_flat
from .simulate import SimConfig, moment_study, simulate_path
from .textdoc import dumps, format_float

__all__ = ["RunConfig", "parse_counts_csv", "run", "main", "entry", "fit_to_tree", "fit_from_tree"]

_ARTIFACT = f"spingarch {__version__}"


class UsageError(Exception):
    """Invalid invocation; maps to exit code 1."""


@dataclass
class RunConfig:
    """Everything that determines a run, gathered from the command line."""

    command: str
    input: Optional[str] = None
    out: Optional[str] = None
    family: str = NEGBIN
    link: str = SOFTPLUS_LINEAR
    p: int = 1
    q: int = 0
    c: float = 1.0
    hidden: Optional[int] = None
    seed: int = 0
    restarts: Optional[int] = None
    split: Optional[int] = None
    max_lag: int = 10
    length: Optional[int] = None
    burn_in: int = 500
    alpha0: Optional[float] = None
    alpha: Tuple[float, ...] = ()
    beta: Tuple[float, ...] = ()
    n: Optional[float] = None
    weights: Optional[Tuple[float, ...]] = None
    sizes: Tuple[int, ...] = ()
    replications: int = 100
    models: Tuple[str, ...] = ()
    criterion: str = "aic"
    grid: Optional[str] = None

    def provenance(self) -> Dict[str, object]:
        fields_in_order = (
            "command input out family link p q c hidden seed restarts split max_lag "
            "length burn_in alpha0 alpha beta n weights sizes replications models "
            "criterion grid"
        ).split()
        out: Dict[str, object] = {}
        for name in fields_in_order:
            value = getattr(self, name)
            if value is None or (isinstance(value, tuple) and not value):
                continue
            out[name] = list(value) if isinstance(value, tuple) else value
        return out


# ---------------------------------------------------------------------------
# CSV ingestion


def parse_counts_csv(path) -> CountSeries:
    """Read a counts CSV: a `count` column, or `timestamp,count` with header.

    Lines starting with '#' are provenance comments and are skipped.  Counts
    must be non-negative integers; violations raise a DataError citing the
    file line number.  Unevenly spaced timestamps only produce a warning.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"input file not found: {path}")
    header: Optional[List[str]] = None
    counts: List[int] = []
    stamps: List[str] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (row[0].lstrip().startswith("#")):
                continue
            cells = [cell.strip() for cell in row]
            if header is None:
                lowered = [c.lower() for c in cells]
                if lowered == ["count"]:
                    header = lowered
                elif lowered == ["timestamp", "count"]:
                    header = lowered
                else:
                    raise DataError(
                        f"line {lineno}: header must be 'count' or 'timestamp,count', got {row!r}"
                    )
                continue
            if len(cells) != len(header):
                raise DataError(f"line {lineno}: expected {len(header)} columns, got {len(cells)}")
            raw = cells[-1]
            try:
                value = float(raw)
            except ValueError:
                raise DataError(f"line {lineno}: non-numeric count {raw!r}") from None
            if not math.isfinite(value) or value != int(value):
                raise DataError(f"line {lineno}: counts must be integers, got {raw!r}")
            if value < 0:
                raise DataError(f"line {lineno}: counts must be non-negative, got {raw!r}")
            counts.append(int(value))
            if len(header) == 2:
                stamps.append(cells[0])
    if header is None or not counts:
        raise DataError(f"{path}: no count rows found")
    if stamps:
        _warn_on_gaps(stamps)
    return CountSeries(np.asarray(counts), timestamps=stamps or None)


def _warn_on_gaps(stamps: Sequence[str]):
    from datetime import datetime

    values: List[float] = []
    for stamp in stamps:
        try:
            values.append(float(stamp))
        except ValueError:
            try:
                values.append(datetime.fromisoformat(stamp).timestamp())
            except ValueError:
                return
    diffs = np.diff(values)
    if diffs.size and (diffs.max() - diffs.min()) > 1e-9 * max(1.0, abs(diffs.max())):
        warnings.warn("timestamps are not equally spaced; continuing", UserWarning)


# ---------------------------------------------------------------------------
# FitResult serialization


def _spec_to_tree(spec: ModelSpec) -> Dict[str, object]:
    tree: Dict[str, object] = {
        "family": spec.family,
        "link": spec.link,
        "p": spec.p,
        "q": spec.q,
        "c": float(spec.c),
    }
    if spec.hidden is not None:
        tree["hidden"] = spec.hidden
    return tree


def _spec_from_tree(tree: Dict[str, object]) -> ModelSpec:
    return ModelSpec(
        family=str(tree["family"]),
        link=str(tree["link"]),
        p=int(tree["p"]),
        q=int(tree["q"]),
        c=float(tree["c"]),
        hidden=int(tree["hidden"]) if "hidden" in tree else None,
    )


def fit_to_tree(fit: FitResult) -> Dict[str, object]:
    """Serialize a FitResult to a plain tree of scalars and lists."""
    tree = _spec_to_tree(fit.spec)
    tree.update(
        converged=bool(fit.converged),
        iterations=int(fit.iterations),
        restarts_used=int(fit.restarts_used),
        loglik=float(fit.loglik),
        aic=float(fit.aic),
        bic=float(fit.bic),
        s=int(len(fit.lambda_path)),
    )
    est = fit.estimates
    if isinstance(est, LinearParams):
        sub: Dict[str, object] = {
            "kind": "linear",
            "alpha0": float(est.alpha0),
            "alpha": [float(a) for a in est.alpha],
            "beta": [float(b) for b in est.beta],
        }
        if est.n is not None:
            sub["n"] = float(est.n)
        tree["k"] = est.k(fit.spec.family)
    else:
        sub = {
            "kind": "neural",
            "K": est.input_width,
            "L": est.hidden,
            "family": fit.spec.family,
            "weights": [float(w) for w in np.concatenate([est.u0.ravel(), est.u1])],
        }
        if est.n is not None:
            sub["n"] = float(est.n)
        tree["k"] = est.count(fit.spec.family)
    tree["estimates"] = sub
    tree["std_errors"] = [float(v) for v in np.asarray(fit.std_errors, dtype=float)]
    tree["lambda_path"] = [float(v) for v in np.asarray(fit.lambda_path, dtype=float)]
    return tree


def fit_from_tree(tree: Dict[str, object]) -> FitResult:
    """Rebuild a FitResult from its serialized tree; inverse of `fit_to_tree`."""
    spec = _spec_from_tree(tree)
    sub = tree["estimates"]
    if sub["kind"] == "linear":
        estimates: object = LinearParams(
            alpha0=float(sub["alpha0"]),
            alpha=tuple(float(v) for v in sub["alpha"]),
            beta=tuple(float(v) for v in sub["beta"]),
            n=float(sub["n"]) if "n" in sub else None,
        )
    else:
        K, L = int(sub["K"]), int(sub["L"])
        flat = np.asarray([float(v) for v in sub["weights"]], dtype=float)
        estimates = NeuralWeights(u0=flat[: K * L].reshape(K, L), u1=flat[K * L :],
                                  n=float(sub["n"]) if "n" in sub else None)
    return FitResult(
        spec=spec,
        estimates=estimates,
        std_errors=np.asarray([float(v) for v in tree["std_errors"]], dtype=float),
        loglik=float(tree["loglik"]),
        aic=float(tree["aic"]),
        bic=float(tree["bic"]),
        lambda_path=np.asarray([float(v) for v in tree["lambda_path"]], dtype=float),
        converged=bool(tree["converged"]),
        iterations=int(tree["iterations"]),
        restarts_used=int(tree["restarts_used"]),
    )


# ---------------------------------------------------------------------------
# Helpers


_MODEL_RE = re.compile(r"(neu-)?(pois|poisson|nb|negbin)\((\d+),(\d+)\)")


def _parse_model_token(token: str) -> Tuple[str, str, int, int]:
    m = _MODEL_RE.fullmatch(token.strip())
    if not m:
        raise UsageError(
            f"bad --model {token!r}; expected e.g. 'nb(1,1)', 'pois(2,0)' or 'neu-nb(1,1)'"
        )
    link = NEURAL if m.group(1) else SOFTPLUS_LINEAR
    family = POISSON if m.group(2) in ("pois", "poisson") else NEGBIN
    return family, link, int(m.group(3)), int(m.group(4))


def _spec_from_config(config: RunConfig) -> ModelSpec:
    hidden = config.hidden if config.link == NEURAL else None
    if config.link == NEURAL and hidden is None:
        hidden = 1
    try:
        return ModelSpec(config.family, config.link, config.p, config.q, config.c, hidden)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def _params_from_config(config: RunConfig, spec: ModelSpec):
    if spec.link == SOFTPLUS_LINEAR:
        if config.alpha0 is None:
            raise UsageError("simulate/study with a linear link needs --alpha0")
        if len(config.alpha) != spec.p or len(config.beta) != spec.q:
            raise UsageError(f"need {spec.p} --alpha and {spec.q} --beta coefficients")
        n = config.n
        if spec.family == NEGBIN and n is None:
            raise UsageError("negbin family needs --n")
        return LinearParams(config.alpha0, config.alpha, config.beta, n if spec.family == NEGBIN else None)
    if config.weights is None:
        raise UsageError("simulate with a neural link needs --weights")
    flat = list(config.weights)
    if spec.family == NEGBIN:
        if config.n is None:
            raise UsageError("negbin family needs --n")
        flat = flat + [math.log(config.n)]
    try:
        return weights_from_flat(np.asarray(flat, dtype=float), spec)
    except ParameterError as exc:
        raise UsageError(str(exc)) from exc


def _opts_from_config(config: RunConfig, default_restarts: int) -> OptimizerOptions:
    restarts = config.restarts if config.restarts is not None else default_restarts
    return OptimizerOptions(restarts=restarts, seed=config.seed)


def _fit_one(spec: ModelSpec, series, opts: OptimizerOptions) -> FitResult:
    if spec.link == NEURAL:
        return fit_neural(spec, series, opts)
    return fit_cml(spec, series, opts)


def _write_text(path, text: str):
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _document(config: RunConfig, body: Dict[str, object]) -> str:
    tree: Dict[str, object] = {"artifact": _ARTIFACT, "config": config.provenance()}
    tree.update(body)
    return dumps(tree)


def _csv_provenance(config: RunConfig) -> List[str]:
    pairs = " ".join(f"{k}={v}" for k, v in config.provenance().items())
    return [f"# artifact: {_ARTIFACT}", f"# config: {pairs}"]


def _series_summary(series: CountSeries) -> Dict[str, object]:
    values = np.asarray(series.values, dtype=float)
    summary: Dict[str, object] = {"s": int(values.size), "mean": float(values.mean())}
    if values.mean() > 0 and values.size > 1:
        summary["dispersion"] = float(values.var(ddof=1) / values.mean())
    return summary


# ---------------------------------------------------------------------------
# Commands


def _cmd_simulate(config: RunConfig) -> int:
    if config.length is None or config.length < 1:
        raise UsageError("simulate needs --length >= 1")
    if config.out is None:
        raise UsageError("simulate needs --out")
    spec = _spec_from_config(config)
    params = _params_from_config(config, spec)
    sim = SimConfig(spec=spec, params=params, length=config.length, burn_in=config.burn_in,
                    rng=RngStream(config.seed))
    path = simulate_path(sim)
    lines = _csv_provenance(config) + ["count"] + [str(int(v)) for v in path]
    _write_text(config.out, "\n".join(lines) + "\n")
    return 0


def _cmd_fit(config: RunConfig) -> int:
    if config.input is None or config.out is None:
        raise UsageError("fit needs an input CSV and --out")
    series = parse_counts_csv(config.input)
    opts_linear = _opts_from_config(config, default_restarts=2)
    opts_neural = _opts_from_config(config, default_restarts=10)

    if config.models:
        fits: Dict[str, FitResult] = {}
        for token in config.models:
            family, link, p, q = _parse_model_token(token)
            hidden = (config.hidden or 1) if link == NEURAL else None
            spec = ModelSpec(family, link, p, q, config.c, hidden)
            opts = opts_neural if link == NEURAL else opts_linear
            fits[token] = _fit_one(spec, series, opts)
        crit = config.criterion
        ranked = sorted(
            fits.items(),
            key=lambda item: (getattr(item[1], crit), fit_to_tree(item[1])["k"],
                              item[1].spec.p + item[1].spec.q),
        )
        best_label = ranked[0][0]
        body: Dict[str, object] = {
            "series": _series_summary(series),
            "fits": {label: fit_to_tree(fit) for label, fit in fits.items()},
            "selection": {"criterion": crit, "best": best_label},
        }
        _write_text(config.out, _document(config, body))
        return 0 if fits[best_label].converged else 4

    spec = _spec_from_config(config)
    opts = opts_neural if spec.link == NEURAL else opts_linear
    fit = _fit_one(spec, series, opts)
    body = {"series": _series_summary(series), "fit": fit_to_tree(fit)}
    _write_text(config.out, _document(config, body))
    return 0 if fit.converged else 4


def _cmd_moments(config: RunConfig) -> int:
    if config.grid is None or config.out is None:
        raise UsageError("moments needs --grid and --out")
    length = config.length if config.length is not None else 100000
    if length < 1:
        raise UsageError("moments needs --length >= 1")
    grid_path = Path(config.grid)
    if not grid_path.exists():
        raise DataError(f"grid file not found: {grid_path}")
    entries: List[SimConfig] = []
    with open(grid_path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(row for row in fh if not row.startswith("#"))
        for idx, row in enumerate(reader):
            try:
                alpha0 = float(row["alpha0"])
                alpha1 = float(row["alpha1"])
                beta1 = float(row["beta1"])
                n = float(row["n"]) if config.family == NEGBIN else None
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(f"grid row {idx + 1}: need alpha0,alpha1,beta1[,n] columns") from exc
            spec = ModelSpec(config.family, SOFTPLUS_LINEAR, 1, 1, config.c)
            params = LinearParams(alpha0, (alpha1,), (beta1,), n)
            entries.append(
                SimConfig(spec=spec, params=params, length=length, burn_in=config.burn_in,
                          rng=RngStream(config.seed, idx))
            )
    lags = config.max_lag if config.max_lag else 3
    rows = moment_study(entries, max_lag=lags)
    header = ["model", "alpha0", "alpha1", "beta1", "n", "c", "flagged",
              "sp_mean", "sp_dispersion"]
    header += [f"sp_acf{h}" for h in range(1, lags + 1)]
    header += ["lin_mean", "lin_dispersion"] + [f"lin_acf{h}" for h in range(1, lags + 1)]
    lines = _csv_provenance(config) + [",".join(header)]
    for idx, row in enumerate(rows):
        params = row.config.params
        cells = [
            str(idx + 1),
            format_float(params.alpha0),
            format_float(params.alpha[0]),
            format_float(params.beta[0]),
            format_float(params.n) if params.n is not None else "",
            format_float(row.config.spec.c),
            "true" if row.flagged else "false",
        ]
        if row.empirical is not None:
            cells += [format_float(row.empirical.mean), format_float(row.empirical.dispersion)]
            cells += [format_float(v) for v in row.empirical.acf]
        else:
            cells += [""] * (2 + lags)
        if row.linear is not None:
            cells += [format_float(row.linear.mu), format_float(row.linear.dispersion)]
            cells += [format_float(v) for v in row.linear.acf]
        else:
            cells += [""] * (2 + lags)
        lines.append(",".join(cells))
    _write_text(config.out, "\n".join(lines) + "\n")
    return 0


def _cmd_study(config: RunConfig) -> int:
    if config.out is None:
        raise UsageError("study needs --out")
    if not config.sizes:
        raise UsageError("study needs --sizes")
    if config.replications < 1:
        raise UsageError("study needs --replications >= 1")
    spec = _spec_from_config(config)
    if spec.link != SOFTPLUS_LINEAR:
        raise UsageError("study supports the softplus-linear link")
    truth = _params_from_config(config, spec)
    from .estimate import simulation_study

    opts = _opts_from_config(config, default_restarts=0)
    table = simulation_study(spec, truth, config.sizes, config.replications,
                             seed=config.seed, opts=opts, burn_in=config.burn_in)
    body: Dict[str, object] = {"study": {
        "sizes": list(table.sizes),
        "replications": table.replications,
        "parameters": list(table.param_names),
    }}
    for size in table.sizes:
        size_tree: Dict[str, object] = {"excluded": table.excluded[size]}
        for name in table.param_names:
            cell = table.cells[size].get(name)
            if cell is None:
                continue
            size_tree[name] = {
                "mean": cell.mean,
                "abs_bias": cell.abs_bias,
                "mse": cell.mse,
            }
        body["study"][f"size_{size}"] = size_tree
    _write_text(config.out, _document(config, body))
    return 0


def _cmd_diagnose(config: RunConfig) -> int:
    if config.input is None or config.out is None:
        raise UsageError("diagnose needs an input CSV and --out directory")
    series = parse_counts_csv(config.input)
    spec = _spec_from_config(config)
    opts = _opts_from_config(config, default_restarts=10 if spec.link == NEURAL else 2)
    fit = _fit_one(spec, series, opts)
    outdir = Path(config.out)
    outdir.mkdir(parents=True, exist_ok=True)
    body = {"series": _series_summary(series), "fit": fit_to_tree(fit)}
    _write_text(outdir / "fit.txt", _document(config, body))

    resid = pearson_residuals(fit, series)
    lines = _csv_provenance(config) + ["z"] + [format_float(v) for v in resid.values]
    _write_text(outdir / "residuals.csv", "\n".join(lines) + "\n")

    max_lag = min(config.max_lag, len(series) - 1)
    acf = sample_acf(resid.values, max_lag)
    pacf = sample_pacf(resid.values, max_lag)
    lines = _csv_provenance(config) + ["lag,acf,pacf"]
    lines += [f"{h + 1},{format_float(acf[h])},{format_float(pacf[h])}" for h in range(max_lag)]
    _write_text(outdir / "correlogram.csv", "\n".join(lines) + "\n")

    freqs, fractions, band = cumulative_periodogram(resid.values)
    lines = _csv_provenance(config) + [f"# band_half_width: {format_float(band)}"]
    lines += ["frequency,cumulative_fraction"]
    lines += [f"{format_float(f)},{format_float(c)}" for f, c in zip(freqs, fractions)]
    _write_text(outdir / "periodogram.csv", "\n".join(lines) + "\n")
    return 0 if fit.converged else 4


def _cmd_forecast(config: RunConfig) -> int:
    if config.input is None or config.out is None:
        raise UsageError("forecast needs an input CSV and --out")
    if config.split is None:
        raise UsageError("forecast needs --split (training length)")
    series = parse_counts_csv(config.input)
    s = len(series)
    if not (1 <= config.split < s):
        raise UsageError(f"--split must lie in [1, {s - 1}]")
    spec = _spec_from_config(config)
    train = CountSeries(series.values[: config.split])
    opts = _opts_from_config(config, default_restarts=10 if spec.link == NEURAL else 2)
    fit = _fit_one(spec, train, opts)
    horizon = s - config.split
    preds = one_step_forecasts(fit, series, horizon)
    actuals = series.values[config.split :]
    body = {
        "forecast": {
            "split": config.split,
            "horizon": horizon,
            "rmse": rmse(preds, actuals),
            "forecasts": [float(v) for v in preds],
            "actuals": [int(v) for v in actuals],
        },
        "fit": fit_to_tree(fit),
    }
    _write_text(config.out, _document(config, body))
    return 0 if fit.converged else 4


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "moments": _cmd_moments,
    "study": _cmd_study,
    "diagnose": _cmd_diagnose,
    "forecast": _cmd_forecast,
}


def run(config: RunConfig) -> int:
    """Execute one workflow; returns the process exit code."""
    handler = _COMMANDS.get(config.command)
    if handler is None:
        raise UsageError(f"unknown command {config.command!r}")
    return handler(config)


# ---------------------------------------------------------------------------
# Argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _comma_floats(text: str) -> Tuple[float, ...]:
    if not text.strip():
        return ()
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _comma_ints(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from exc


def _build_parser() -> _Parser:
    parser = _Parser(prog="spingarch", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    def add_common(sp, with_input=False):
        if with_input:
            sp.add_argument("input", help="counts CSV")
        sp.add_argument("--family", choices=[POISSON, NEGBIN], default=NEGBIN)
        sp.add_argument("--link", choices=[SOFTPLUS_LINEAR, NEURAL], default=SOFTPLUS_LINEAR)
        sp.add_argument("--p", type=int, default=1)
        sp.add_argument("--q", type=int, default=0)
        sp.add_argument("--c", type=float, default=1.0)
        sp.add_argument("--hidden", type=int, default=None)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--restarts", type=int, default=None)
        sp.add_argument("--out", default=None)

    sp = sub.add_parser("simulate", help="generate a count series CSV")
    add_common(sp)
    sp.add_argument("--length", type=int, default=None)
    sp.add_argument("--burn-in", dest="burn_in", type=int, default=500)
    sp.add_argument("--alpha0", type=float, default=None)
    sp.add_argument("--alpha", type=_comma_floats, default=())
    sp.add_argument("--beta", type=_comma_floats, default=())
    sp.add_argument("--n", type=float, default=None)
    sp.add_argument("--weights", type=_comma_floats, default=None)

    sp = sub.add_parser("fit", help="fit one model or select among several")
    add_common(sp, with_input=True)
    sp.add_argument("--model", action="append", dest="models", default=[])
    sp.add_argument("--criterion", choices=["aic", "bic"], default="aic")

    sp = sub.add_parser("moments", help="moment comparison over a parameter grid")
    add_common(sp)
    sp.add_argument("--grid", default=None)
    sp.add_argument("--length", type=int, default=None)
    sp.add_argument("--burn-in", dest="burn_in", type=int, default=500)
    sp.add_argument("--max-lag", dest="max_lag", type=int, default=3)

    sp = sub.add_parser("study", help="simulate-and-refit bias/MSE study")
    add_common(sp)
    sp.add_argument("--alpha0", type=float, default=None)
    sp.add_argument("--alpha", type=_comma_floats, default=())
    sp.add_argument("--beta", type=_comma_floats, default=())
    sp.add_argument("--n", type=float, default=None)
    sp.add_argument("--sizes", type=_comma_ints, default=())
    sp.add_argument("--replications", type=int, default=100)
    sp.add_argument("--burn-in", dest="burn_in", type=int, default=500)

    sp = sub.add_parser("diagnose", help="fit and write residual diagnostics")
    add_common(sp, with_input=True)
    sp.add_argument("--max-lag", dest="max_lag", type=int, default=10)

    sp = sub.add_parser("forecast", help="one-step forecasts after a train/test split")
    add_common(sp, with_input=True)
    sp.add_argument("--split", type=int, default=None)

    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    kwargs = {}
    for name in RunConfig.__dataclass_fields__:
        if hasattr(args, name):
            value = getattr(args, name)
            if isinstance(value, list):
                value = tuple(value)
            kwargs[name] = value
    return RunConfig(**kwargs)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments and run; returns the exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "command", None):
            raise UsageError("a command is required (simulate, fit, moments, study, diagnose, forecast)")
        return run(_config_from_args(args))
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 2
    except (ParameterError, NumericError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


def entry():  # pragma: no cover - console-script shim
    sys.exit(main())
