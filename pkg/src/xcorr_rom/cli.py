"""Command-line experiments: ``generate``, ``fit``, ``predict``, ``evaluate``, ``sweep``.

Settings resolve in order: built-in defaults, per-case defaults, a flat JSON
config (``--config``), then explicit flags. Exit status is 0 on success,
2 on usage or validation errors and 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io as rom_io
from .errors import FormatError, GridMismatchError, ParameterError, RomError, StageError
from .pipeline import (DEFAULT_SWEEP_RANKS, ErrorReport, default_reference_index, evaluate,
                       offline, predict, rank_sweep)
from .reduction import DEFAULT_ENERGY_THRESHOLD
from .snapshots import (VORTEX_FIELDS, SnapshotSet, VortexParams, WaveParams, generate_vortex,
                        generate_wave, split)

CASES = ("gaussian_wave", "isentropic_vortex")
DESK_GRID = "120x60"
FULL_GRID = "240x120"


@dataclass
class ExperimentConfig:
    case: str = "gaussian_wave"
    beta: float = 1.0
    sigma: float = 0.1
    n_nodes: int = 256
    n_times: int = 100
    grid: str = DESK_GRID
    full_scale: bool = False
    field: str = "density"
    train_fraction: float | None = None
    reference_time: float | None = None
    reference_index: int | None = None
    energy_threshold: float | None = None
    rank: int | None = None
    register: bool = True
    kernel: str = "gaussian"
    shape_parameter: float | None = None
    ridge: float = 0.0
    coeff_extrapolation: str = "clamp"
    shift_extrapolation: str = "least_squares_line"
    background: float | str | None = None
    ranks: list = dataclasses.field(default_factory=lambda: list(DEFAULT_SWEEP_RANKS))
    out: str | None = None
    seed: int = 0

    def resolved(self):
        """Copy with case-dependent defaults filled in."""
        c = dataclasses.replace(self, ranks=list(self.ranks))
        if c.case not in CASES:
            raise ParameterError(f"unknown case {c.case!r}")
        for key, value in CASE_DEFAULTS[c.case].items():
            if getattr(c, key) is None:
                setattr(c, key, value)
        if c.background == "none":
            c.background = None
        if c.energy_threshold is None and c.rank is None:
            c.energy_threshold = DEFAULT_ENERGY_THRESHOLD
        return c


# train/test split, reference and registration background per benchmark
CASE_DEFAULTS = {
    "gaussian_wave": {"train_fraction": 0.5, "reference_time": 3.03},
    "isentropic_vortex": {"train_fraction": 0.3, "background": 1.0},
}

CONFIG_KEYS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def _case_name(text):
    name = text.replace("-", "_")
    if name not in CASES:
        raise argparse.ArgumentTypeError(
            f"invalid case {text!r} (choose from gaussian-wave, isentropic-vortex)")
    return name


def _grid_sizes(text):
    try:
        nx, ny = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ParameterError(f"grid must look like 120x60, got {text!r}") from None
    return nx, ny


def _background(text):
    if text in ("none", "mean"):
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, 'mean' or 'none', got {text!r}") from None


def load_config(path):
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ParameterError(f"{path}: config must be a JSON object")
    unknown = sorted(set(doc) - CONFIG_KEYS)
    if unknown:
        raise ParameterError(f"{path}: unknown config keys {unknown}")
    if "case" in doc:
        doc["case"] = doc["case"].replace("-", "_")
    return doc


def build_config(args, case=None):
    values = {}
    if getattr(args, "config", None):
        values.update(load_config(args.config))
    for key in CONFIG_KEYS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if case is not None and "case" not in values:
        values["case"] = case
    # an explicit flag beats the other selection mode coming from the config
    if getattr(args, "rank", None) is not None:
        values["energy_threshold"] = None
    if getattr(args, "energy_threshold", None) is not None:
        values["rank"] = None
    if getattr(args, "full_scale", False):
        values["grid"] = FULL_GRID
    return ExperimentConfig(**values).resolved()


# -- snapshots --------------------------------------------------------------------

def make_snapshots(cfg):
    if cfg.case == "gaussian_wave":
        return generate_wave(WaveParams(beta=cfg.beta, sigma=cfg.sigma, n_nodes=cfg.n_nodes,
                                        n_times=cfg.n_times))
    sizes = _grid_sizes(FULL_GRID if cfg.full_scale else cfg.grid)
    return generate_vortex(VortexParams(sizes=sizes, n_times=cfg.n_times), field=cfg.field)


def _reference_index(cfg, train):
    if cfg.reference_index is not None:
        return cfg.reference_index
    return default_reference_index(train.times, cfg.reference_time)


def _offline_options(cfg):
    return {"background": cfg.background, "kernel": cfg.kernel,
            "shape_parameter": cfg.shape_parameter, "ridge": cfg.ridge,
            "coeff_extrapolation": cfg.coeff_extrapolation,
            "shift_extrapolation": cfg.shift_extrapolation}


def _train_mask(times, train_times):
    return np.isin(np.round(times, 12), np.round(train_times, 12))


# -- commands ---------------------------------------------------------------------

def cmd_generate(args):
    cfg = build_config(args)
    snaps = make_snapshots(cfg)
    out = Path(cfg.out or f"{cfg.case}.snap")
    out.parent.mkdir(parents=True, exist_ok=True)
    rom_io.write_snapshots(out, snaps)
    print(f"wrote {out}: N_h={snaps.grid.n_points}, N_T={snaps.n_snapshots}, "
          f"field={snaps.field_name}")
    return 0


def cmd_fit(args):
    snaps = rom_io.read_snapshots(args.snapshots)
    cfg = build_config(args, case=snaps.params.get("case"))
    train, _ = split(snaps, cfg.train_fraction)
    ref = _reference_index(cfg, train)
    model = offline(train, ref, energy_threshold=cfg.energy_threshold, rank=cfg.rank,
                    register=cfg.register, **_offline_options(cfg))
    out = Path(cfg.out or "model")
    rom_io.save_model(out, model, extra={"train_fraction": cfg.train_fraction,
                                         "seed": cfg.seed, "case": cfg.case})
    rom_io.write_energy_csv(out / "energy.csv", model.basis)
    sel = (f"threshold {cfg.energy_threshold}" if cfg.rank is None else f"fixed rank {cfg.rank}")
    print(f"rank={model.rank}, energy={model.basis.energy_captured:.8f} ({sel}, "
          f"registered={model.registration_enabled}, reference t={model.reference_time:g})")
    print(f"wrote model to {out}")
    return 0


def cmd_predict(args):
    model = rom_io.load_model(args.model)
    if args.times_from:
        src = rom_io.read_snapshots(args.times_from)
        mask = _train_mask(src.times, model.train_times)
        times = {"all": src.times, "train": src.times[mask], "test": src.times[~mask]}[args.subset]
    else:
        times = np.asarray(args.times or [], dtype=float)
    if times.size == 0:
        raise ParameterError("no prediction times given")
    times = np.unique(times)
    pred = predict(model, times)
    snaps = SnapshotSet(model.grid, times, pred, model.field_name, {"source": "prediction"})
    out = Path(args.out or "predictions.snap")
    out.parent.mkdir(parents=True, exist_ok=True)
    rom_io.write_snapshots(out, snaps)
    print(f"wrote {times.size} predicted snapshot(s) to {out}")
    return 0


def _report(times, pred, truth, label):
    norms = np.linalg.norm(truth, axis=0)
    if np.any(norms == 0):
        raise ParameterError(f"zero-norm truth snapshot in the {label} set")
    return ErrorReport(times, np.linalg.norm(pred - truth, axis=0) / norms, label)


def cmd_evaluate(args):
    model = rom_io.load_model(args.model)
    truth = rom_io.read_snapshots(args.truth)
    if truth.grid != model.grid:
        raise GridMismatchError(f"truth grid {truth.grid.sizes} does not match model grid "
                                f"{model.grid.sizes}")
    mask = _train_mask(truth.times, model.train_times)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    if args.predictions:
        pred = rom_io.read_snapshots(args.predictions)
        if pred.grid != truth.grid:
            raise GridMismatchError("prediction and truth grids differ")
    for label, sel in (("train", mask), ("test", ~mask)):
        sub = truth.columns(np.flatnonzero(sel))
        if sub.n_snapshots == 0:
            report = ErrorReport(np.empty(0), np.empty(0), label)
        elif args.predictions:
            keep = np.isin(np.round(sub.times, 12), np.round(pred.times, 12))
            sub = sub.columns(np.flatnonzero(keep))
            idx = np.searchsorted(pred.times, sub.times)
            report = _report(sub.times, pred.data[:, idx], sub.data, label)
            if not keep.any():
                report = ErrorReport(np.empty(0), np.empty(0), label)
        else:
            report = evaluate(model, sub, label)
        rom_io.write_error_csv(out / f"errors_{label}.csv", report)
        mean = report.mean_relative_l2 if report.times.size else float("nan")
        print(f"{label}: n={report.times.size} mean_relative_l2={mean:.6e}")
    return 0


def cmd_sweep(args):
    if args.snapshots:
        snaps = rom_io.read_snapshots(args.snapshots)
        cfg = build_config(args, case=snaps.params.get("case"))
    else:
        cfg = build_config(args)
        snaps = make_snapshots(cfg)
    train, test = split(snaps, cfg.train_fraction)
    ref = _reference_index(cfg, train)
    opts = _offline_options(cfg)
    reg = rank_sweep(train, test, cfg.ranks, True, reference_index=ref, **opts)
    unreg = rank_sweep(train, test, cfg.ranks, False, reference_index=ref, **opts)
    out = Path(cfg.out or "sweep")
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sweep.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["rank", "mean_error_registered", "mean_error_unregistered"])
        for (r, e_reg), (_, e_unreg) in zip(reg, unreg):
            w.writerow([r, repr(e_reg), repr(e_unreg)])
    s_reg = offline(train, ref, rank=1, register=True, **opts).basis.singular_values
    s_raw = offline(train, ref, rank=1, register=False, **opts).basis.singular_values
    with open(out / "singular_values.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["mode_index", "sigma_registered", "energy_registered",
                    "sigma_unregistered", "energy_unregistered"])
        e_reg = np.cumsum(s_reg**2) / np.sum(s_reg**2)
        e_raw = np.cumsum(s_raw**2) / np.sum(s_raw**2)
        for i in range(s_reg.size):
            w.writerow([i + 1, repr(float(s_reg[i])), repr(float(e_reg[i])),
                        repr(float(s_raw[i])), repr(float(e_raw[i]))])
    for (r, e_reg), (_, e_unreg) in zip(reg, unreg):
        print(f"rank={r:3d}  registered={e_reg:.4e}  unregistered={e_unreg:.4e}")
    print(f"wrote {out / 'sweep.csv'} and {out / 'singular_values.csv'}")
    return 0


# -- parser -------------------------------------------------------------------------

def _d(key):
    """Help suffix describing the default of a config key."""
    base = getattr(ExperimentConfig(), key)
    per_case = {c: CASE_DEFAULTS[c][key] for c in CASES if key in CASE_DEFAULTS[c]}
    if per_case:
        parts = ", ".join(f"{CASE_DEFAULTS[c].get(key, base)} for {c.replace('_', '-')}"
                          for c in CASES)
        return f" (default: {parts})"
    return f" (default: {base})"


def _add_common(p):
    p.add_argument("--config", metavar="JSON", help="flat JSON config file; flags override it")
    p.add_argument("--seed", type=int, help="recorded with the outputs; the pipeline is deterministic" + _d("seed"))


def _add_generation(p, case_required=False):
    p.add_argument("--case", type=_case_name, required=case_required,
                   help="gaussian-wave or isentropic-vortex" + _d("case"))
    p.add_argument("--beta", type=float, help="wave amplitude" + _d("beta"))
    p.add_argument("--sigma", type=float, help="wave standard deviation" + _d("sigma"))
    p.add_argument("--n-nodes", dest="n_nodes", type=int, help="wave grid nodes" + _d("n_nodes"))
    p.add_argument("--n-times", dest="n_times", type=int, help="number of snapshots" + _d("n_times"))
    p.add_argument("--grid", help="vortex grid NXxNY" + _d("grid"))
    p.add_argument("--full-scale", dest="full_scale", action="store_true", default=None,
                   help=f"vortex on the {FULL_GRID} grid (default: off)")
    p.add_argument("--field", choices=VORTEX_FIELDS, help="vortex field" + _d("field"))


def _add_model(p):
    p.add_argument("--train-fraction", dest="train_fraction", type=float,
                   help="chronological training fraction" + _d("train_fraction"))
    p.add_argument("--reference-time", dest="reference_time", type=float,
                   help="registration reference: training time nearest this value; "
                        "without it, 30%% into the training span" + _d("reference_time"))
    p.add_argument("--reference-index", dest="reference_index", type=int,
                   help="registration reference column (overrides --reference-time)"
                        + _d("reference_index"))
    sel = p.add_mutually_exclusive_group()
    sel.add_argument("--energy-threshold", dest="energy_threshold", type=float,
                     help=f"POD energy threshold (default: {DEFAULT_ENERGY_THRESHOLD})")
    sel.add_argument("--rank", type=int, help="fixed POD rank" + _d("rank"))
    p.add_argument("--no-register", dest="register", action="store_false", default=None,
                   help="build the ROM on unregistered snapshots (default: register)")
    p.add_argument("--kernel", choices=("gaussian", "multiquadric", "thin_plate"),
                   help="RBF kernel" + _d("kernel"))
    p.add_argument("--shape-parameter", dest="shape_parameter", type=float,
                   help="RBF inverse length; default 1/mean time gap")
    p.add_argument("--ridge", type=float, help="RBF diagonal regularisation" + _d("ridge"))
    p.add_argument("--coeff-extrapolation", dest="coeff_extrapolation",
                   choices=("clamp", "native"),
                   help="coefficient RBF outside the training interval" + _d("coeff_extrapolation"))
    p.add_argument("--shift-extrapolation", dest="shift_extrapolation",
                   choices=("least_squares_line", "last_segment_slope"),
                   help="shift map outside the training interval" + _d("shift_extrapolation"))
    p.add_argument("--background", type=_background,
                   help="level removed before correlating: a number, 'mean' or 'none'"
                        + _d("background"))


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xcorr-rom",
        description="POD-RBF reduced-order models with cross-correlation snapshot registration.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a benchmark snapshot file")
    _add_common(p)
    _add_generation(p)
    p.add_argument("--out", help="snapshot file (default: <case>.snap)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="build a ROM from a snapshot file")
    _add_common(p)
    p.add_argument("--snapshots", required=True, help="snapshot file from 'generate'")
    _add_model(p)
    p.add_argument("--out", help="model directory (default: model)")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict snapshots at new times")
    p.add_argument("--model", required=True, help="model directory from 'fit'")
    p.add_argument("--times", type=float, nargs="*", help="prediction times")
    p.add_argument("--times-from", dest="times_from", help="take times from a snapshot file")
    p.add_argument("--subset", choices=("all", "train", "test"), default="all",
                   help="with --times-from, which times to use (default: all)")
    p.add_argument("--out", help="output snapshot file (default: predictions.snap)")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="relative L2 errors on train and test snapshots")
    p.add_argument("--model", required=True, help="model directory from 'fit'")
    p.add_argument("--truth", required=True, help="ground-truth snapshot file")
    p.add_argument("--predictions", help="score this prediction file instead of running the model")
    p.add_argument("--out", help="directory for errors_train.csv/errors_test.csv (default: .)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="registered vs unregistered error over POD ranks")
    _add_common(p)
    _add_generation(p)
    p.add_argument("--snapshots", help="use this snapshot file instead of generating")
    _add_model(p)
    p.add_argument("--ranks", type=int, nargs="+", help="POD ranks" + _d("ranks"))
    p.add_argument("--out", help="output directory (default: sweep)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"xcorr-rom {args.command}: error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc.__cause__, ParameterError) else 1
    except (ParameterError, GridMismatchError) as exc:
        print(f"xcorr-rom {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (FormatError, RomError, OSError) as exc:
        print(f"xcorr-rom {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
