"""Command-line experiment harness.

Subcommands::

    gen-synthetic   generate the built-in test patterns (+ reference masks)
    segment         one image -> frequency map, labels, metrics
    sweep           coupling x threshold grid, thresholds applied post-hoc
    noise-study     mislabel rate vs Gaussian noise variance, per method
    compare         per-image mislabel rates for all methods vs references

All outputs are PGM masks and plain CSV (column layouts documented in the
README); every command writes ``run_report.txt`` with the fully resolved
parameter set.  Exit codes: 0 success, 2 configuration/validation error,
3 numerical failure, 4 I/O error.

Settings resolve in priority order: explicit command-line flag, config
file (``key = value`` lines, # comments), preset, built-in default.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .errors import (ConfigError, DegenerateValues, NumericalBlowup,
                     OscsegError, PgmError)
from .frequency import FrequencyMap
from .images import (GrayImage, NoiseSpec, add_gaussian_noise,
                     generate_quadrant_image, generate_two_region_image,
                     quadrant_reference, read_pgm, write_pgm)
from .models import MODELS
from .network import CouplingSpec, default_sim_config, simulate
from .presets import (DETAIL_COUPLING, PRESET_NAMES, TUNED_THRESHOLDS,
                      default_params, preset_settings)
from .segmentation import (LabelMap, cluster_by_gap, mislabel_rate,
                           otsu_threshold, segment_binary)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_SIM_KEYS = ("dt", "total_time", "window", "transient_fraction",
             "convergence_tol", "jitter")


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _read_config_file(path: str) -> dict:
    """Parse a plain `key = value` config file into a string dict."""
    settings = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        settings[key.replace("-", "_")] = value
    return settings


def _resolve_settings(args, float_keys=(), int_keys=(), str_keys=()) -> dict:
    """Merge CLI flags, config file, and preset into one settings dict."""
    resolved: dict = {}
    if getattr(args, "preset", None):
        resolved.update(preset_settings(args.preset))
    if getattr(args, "config", None):
        raw = _read_config_file(args.config)
        for key, value in raw.items():
            try:
                if key in float_keys:
                    resolved[key] = float(value)
                elif key in int_keys:
                    resolved[key] = int(value)
                elif key in str_keys or key in ("model", "mode", "thresholds"):
                    resolved[key] = value
                else:
                    raise ConfigError(f"unknown config key {key!r}")
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    for key in (*float_keys, *int_keys, *str_keys):
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _sim_config(model: str, seed: int, settings: dict):
    overrides = {k: settings[k] for k in _SIM_KEYS if k in settings}
    return default_sim_config(model, seed=seed, **overrides)


def _load_image(path: str) -> GrayImage:
    return read_pgm(Path(path).read_bytes())


def _load_reference(path: str) -> LabelMap:
    """Reference mask PGM -> labels; distinct gray levels become 0..K-1."""
    image = _load_image(path)
    _, inverse = np.unique(image.pixels, return_inverse=True)
    return LabelMap(inverse.reshape(image.shape).astype(int))


def _write_report(out_dir: Path, command: str, entries: dict):
    lines = [f"command = {command}"]
    for key in sorted(entries):
        lines.append(f"{key} = {_fmt(entries[key])}")
    (out_dir / "run_report.txt").write_text("\n".join(lines) + "\n")


def _segment_map(fmap: FrequencyMap, mode: str, threshold, gap_threshold):
    """Apply the configured segmentation mode to a frequency map.

    Returns (LabelMap, effective threshold).
    """
    if mode == "gap-cluster":
        if gap_threshold is None:
            raise ConfigError("gap-cluster mode needs --gap-threshold")
        return cluster_by_gap(fmap, gap_threshold), gap_threshold
    if mode == "otsu-binary":
        if threshold is None:
            usable = fmap.freqs[fmap.usable_mask]
            threshold = otsu_threshold(usable)
        return segment_binary(fmap, threshold), threshold
    raise ConfigError(f"unknown segmentation mode {mode!r}")


def _run_model_pipeline(image: GrayImage, model: str, coupling: float,
                        seed: int, settings: dict):
    """simulate + auto-threshold helper shared by the study commands."""
    params = default_params(model)
    cfg = _sim_config(model, seed, settings)
    fmap, converged = simulate(image, params, CouplingSpec(coupling), cfg)
    return fmap, converged


def _method_binary_labels(image: GrayImage, method: str, coupling_table,
                          seed: int, settings: dict,
                          fixed_thresholds=None) -> LabelMap:
    """Binary segmentation of one image by one method.

    ``method`` is a model name or "otsu" (intensity baseline).  Model
    methods threshold the frequency map, with Otsu auto-scaling unless
    ``fixed_thresholds`` supplies the value.
    """
    if method == "otsu":
        return segment_binary(image, otsu_threshold(image.pixels))
    fmap, _ = _run_model_pipeline(image, method, coupling_table[method],
                                  seed, settings)
    if fixed_thresholds is not None:
        threshold = fixed_thresholds[method]
    else:
        threshold = otsu_threshold(fmap.freqs[fmap.usable_mask])
    return segment_binary(fmap, threshold)


def _parse_float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad {flag} list: {exc}") from exc
    if not values:
        raise ConfigError(f"{flag} must list at least one value")
    return values


def _run_jobs(jobs, workers: int):
    """Evaluate thunks, preserving order; results independent of workers."""
    if workers <= 1:
        return [job() for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(job) for job in jobs]
        return [f.result() for f in futures]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _cmd_gen_synthetic(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.kind == "quadrant":
        image = generate_quadrant_image(args.side, args.levels, seed=args.seed)
        reference = LabelMap(quadrant_reference(args.side))
    elif args.kind == "two-region":
        a, b = _parse_float_list(args.intensities, "--intensities")[:2]
        image, ref = generate_two_region_image(args.side, a, b)
        reference = LabelMap(ref)
    else:
        raise ConfigError(f"unknown kind {args.kind!r}")
    if args.noise_variance:
        image = add_gaussian_noise(image,
                                   NoiseSpec(args.noise_variance, args.seed))
    (out_dir / "image.pgm").write_bytes(write_pgm(image))
    (out_dir / "reference.pgm").write_bytes(
        write_pgm(reference.to_pgm_image()))
    _write_report(out_dir, "gen-synthetic", {
        "kind": args.kind, "side": args.side, "levels": args.levels,
        "seed": args.seed, "noise_variance": args.noise_variance,
        "out_dir": str(out_dir)})
    print(f"wrote {out_dir / 'image.pgm'} and {out_dir / 'reference.pgm'}")
    return EXIT_OK


def _cmd_segment(args) -> int:
    settings = _resolve_settings(
        args,
        float_keys=("coupling", "threshold", "gap_threshold", *_SIM_KEYS),
        str_keys=("model", "mode"))
    model = settings.get("model")
    if model not in MODELS:
        raise ConfigError(f"--model must be one of {sorted(MODELS)}")
    coupling = settings.get("coupling", DETAIL_COUPLING[model])
    mode = settings.get("mode")
    if mode is None:
        mode = "gap-cluster" if "gap_threshold" in settings else "otsu-binary"

    image = _load_image(args.input)
    reference = _load_reference(args.ref) if args.ref else None

    params = default_params(model)
    cfg = _sim_config(model, args.seed, settings)
    fmap, converged = simulate(image, params, CouplingSpec(coupling), cfg)
    labels, threshold = _segment_map(fmap, mode, settings.get("threshold"),
                                     settings.get("gap_threshold"))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "freqs.csv").write_text(fmap.to_csv())
    (out_dir / "labels.csv").write_text(labels.to_csv())
    (out_dir / "labels.pgm").write_bytes(write_pgm(labels.to_pgm_image()))

    metrics = {"converged": converged, "n_clusters": labels.n_labels,
               "threshold": threshold, "mode": mode}
    if reference is not None:
        score = mislabel_rate(labels, reference)
        metrics["mislabeled_fraction"] = score.mislabeled_fraction
        metrics["pixel_count"] = score.pixel_count
    (out_dir / "metrics.json").write_text(json.dumps(metrics, indent=2,
                                                     sort_keys=True) + "\n")
    _write_report(out_dir, "segment", {
        "input": args.input, "ref": args.ref, "model": model,
        "coupling": coupling, "mode": mode, "threshold": threshold,
        "seed": args.seed, "dt": cfg.dt, "total_time": cfg.total_time,
        "window": cfg.window, "transient_fraction": cfg.transient_fraction,
        "convergence_tol": cfg.convergence_tol, "jitter": cfg.jitter,
        "out_dir": str(out_dir)})
    print(f"{model}: {labels.n_labels} cluster(s), converged={converged}"
          + (f", mislabel={metrics['mislabeled_fraction']:.4f}"
             if reference is not None else ""))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    settings = _resolve_settings(args, float_keys=("coupling", *_SIM_KEYS),
                                 str_keys=("model",))
    model = settings.get("model")
    if model not in MODELS:
        raise ConfigError(f"--model must be one of {sorted(MODELS)}")
    couplings = _parse_float_list(args.couplings, "--couplings")
    thresholds = _parse_float_list(args.thresholds, "--thresholds")

    image = _load_image(args.input)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    params = default_params(model)

    def run_cell(coupling):
        cfg = _sim_config(model, args.seed, settings)
        return simulate(image, params, CouplingSpec(coupling), cfg)

    results = _run_jobs([lambda c=c: run_cell(c) for c in couplings],
                        args.workers)

    rows = ["coupling,threshold,relative,effective_threshold,n_clusters,"
            "status,freqmap_sha256,mask_file"]
    for ci, coupling in enumerate(couplings):
        fmap, _converged = results[ci]
        csv_bytes = fmap.to_csv().encode()
        digest = hashlib.sha256(csv_bytes).hexdigest()
        (out_dir / f"freqs_c{ci}.csv").write_bytes(csv_bytes)
        base = float(np.median(fmap.freqs[fmap.ok_mask])) \
            if fmap.ok_mask.any() else 0.0
        for ti, threshold in enumerate(thresholds):
            effective = threshold * base if args.relative else threshold
            mask_file = f"mask_c{ci}_t{ti}.pgm"
            try:
                labels = cluster_by_gap(fmap, effective)
                (out_dir / mask_file).write_bytes(
                    write_pgm(labels.to_pgm_image()))
                rows.append(f"{_fmt(coupling)},{_fmt(threshold)},"
                            f"{int(args.relative)},{_fmt(effective)},"
                            f"{labels.n_labels},ok,{digest},{mask_file}")
            except OscsegError as exc:
                rows.append(f"{_fmt(coupling)},{_fmt(threshold)},"
                            f"{int(args.relative)},{_fmt(effective)},"
                            f"0,error:{type(exc).__name__},{digest},")
    (out_dir / "sweep.csv").write_text("\n".join(rows) + "\n")
    _write_report(out_dir, "sweep", {
        "input": args.input, "model": model, "couplings": args.couplings,
        "thresholds": args.thresholds, "relative": args.relative,
        "seed": args.seed, "workers": args.workers, "out_dir": str(out_dir)})
    print(f"wrote {out_dir / 'sweep.csv'} "
          f"({len(couplings)}x{len(thresholds)} cells)")
    return EXIT_OK


def _cmd_noise_study(args) -> int:
    settings = _resolve_settings(args, float_keys=(*_SIM_KEYS,),
                                 str_keys=("thresholds",))
    variances = _parse_float_list(args.variances, "--variances")
    if args.trials < 1:
        raise ConfigError("--trials must be >= 1")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    for method in methods:
        if method != "otsu" and method not in MODELS:
            raise ConfigError(f"unknown method {method!r}")
    if args.trial_seeds:
        trial_seeds = [int(s) for s in args.trial_seeds.split(",")]
        if len(trial_seeds) != args.trials:
            raise ConfigError("--trial-seeds length must equal --trials")
    else:
        trial_seeds = [args.seed + k for k in range(args.trials)]

    image = _load_image(args.input)
    reference = _load_reference(args.ref) if args.ref else None
    coupling_table = dict(settings.get("coupling_table", DETAIL_COUPLING))
    fixed = TUNED_THRESHOLDS if settings.get("thresholds") == "tuned" else None

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    # clean (noise-free) segmentation per method: the self-comparison anchor
    clean = {method: _method_binary_labels(image, method, coupling_table,
                                           args.seed, settings, fixed)
             for method in methods}

    def run_cell(variance, method, trial_seed):
        # trials are noise realizations: only the noise seed varies, so a
        # zero-variance cell reproduces the clean anchor exactly
        noisy = add_gaussian_noise(image, NoiseSpec(variance, trial_seed))
        labels = _method_binary_labels(noisy, method, coupling_table,
                                       args.seed, settings, fixed)
        err_self = mislabel_rate(labels, clean[method]).mislabeled_fraction
        err_ref = mislabel_rate(labels, reference).mislabeled_fraction \
            if reference is not None else ""
        return err_self, err_ref

    jobs = []
    keys = []
    for variance in variances:
        for method in methods:
            for trial, trial_seed in enumerate(trial_seeds):
                keys.append((variance, method, trial, trial_seed))
                jobs.append(lambda v=variance, m=method, s=trial_seed:
                            run_cell(v, m, s))
    results = _run_jobs(jobs, args.workers)

    rows = ["variance,method,trial,seed,err_vs_clean,err_vs_ref"]
    for (variance, method, trial, trial_seed), (err_self, err_ref) \
            in zip(keys, results):
        rows.append(f"{_fmt(variance)},{method},{trial},{trial_seed},"
                    f"{_fmt(err_self)},{_fmt(err_ref)}")
    (out_dir / "noise_study.csv").write_text("\n".join(rows) + "\n")

    summary = ["variance,method,trials,mean_err_vs_clean,mean_err_vs_ref"]
    for variance in variances:
        for method in methods:
            cells = [res for key, res in zip(keys, results)
                     if key[0] == variance and key[1] == method]
            mean_self = float(np.mean([c[0] for c in cells]))
            mean_ref = float(np.mean([c[1] for c in cells])) \
                if reference is not None else ""
            summary.append(f"{_fmt(variance)},{method},{len(cells)},"
                           f"{_fmt(mean_self)},{_fmt(mean_ref)}")
    (out_dir / "noise_study_summary.csv").write_text(
        "\n".join(summary) + "\n")
    _write_report(out_dir, "noise-study", {
        "input": args.input, "ref": args.ref, "variances": args.variances,
        "trials": args.trials, "trial_seeds": ",".join(map(str, trial_seeds)),
        "methods": ",".join(methods), "seed": args.seed,
        "workers": args.workers,
        "couplings": json.dumps(coupling_table, sort_keys=True),
        "thresholds": settings.get("thresholds", "auto"),
        "out_dir": str(out_dir)})
    print(f"wrote {out_dir / 'noise_study.csv'} and summary")
    return EXIT_OK


def _cmd_compare(args) -> int:
    settings = _resolve_settings(args, float_keys=(*_SIM_KEYS,),
                                 str_keys=("thresholds",))
    images = [p for p in args.images.split(",") if p]
    refs = [p for p in args.refs.split(",") if p]
    if not images:
        raise ConfigError("--images must list at least one file")
    if len(images) != len(refs):
        raise ConfigError("--images and --refs must have equal length")
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    coupling_table = dict(settings.get("coupling_table", DETAIL_COUPLING))
    fixed = TUNED_THRESHOLDS if settings.get("thresholds") == "tuned" else None

    loaded = [( _load_image(img), _load_reference(ref))
              for img, ref in zip(images, refs)]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def run_cell(idx, method):
        image, reference = loaded[idx]
        labels = _method_binary_labels(image, method, coupling_table,
                                       args.seed, settings, fixed)
        return mislabel_rate(labels, reference).mislabeled_fraction

    jobs = []
    keys = []
    for idx in range(len(images)):
        for method in methods:
            keys.append((idx, method))
            jobs.append(lambda i=idx, m=method: run_cell(i, m))
    results = _run_jobs(jobs, args.workers)

    rows = ["image,method,threshold_mode,mislabel_rate"]
    mode = "tuned" if fixed is not None else "auto"
    for (idx, method), err in zip(keys, results):
        rows.append(f"{images[idx]},{method},{mode},{_fmt(err)}")
    (out_dir / "compare.csv").write_text("\n".join(rows) + "\n")
    _write_report(out_dir, "compare", {
        "images": args.images, "refs": args.refs,
        "methods": ",".join(methods), "threshold_mode": mode,
        "couplings": json.dumps(coupling_table, sort_keys=True),
        "seed": args.seed, "workers": args.workers,
        "out_dir": str(out_dir)})
    print(f"wrote {out_dir / 'compare.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(parser, with_model=True):
    parser.add_argument("--seed", type=int, default=0,
                        help="master RNG seed (default 0)")
    parser.add_argument("--out-dir", required=True,
                        help="directory for all output artifacts")
    parser.add_argument("--config", help="key = value settings file")
    parser.add_argument("--preset", choices=PRESET_NAMES,
                        help="named parameter preset")
    if with_model:
        parser.add_argument("--model", choices=sorted(MODELS),
                            help="oscillator model")
        parser.add_argument("--coupling", type=float,
                            help="coupling coefficient")
    for key, meta in (("dt", "integration step"),
                      ("total-time", "simulation horizon"),
                      ("window", "frequency estimation window"),
                      ("transient-fraction", "trace fraction to skip"),
                      ("convergence-tol", "frequency convergence tolerance"),
                      ("jitter", "initial-state jitter amplitude")):
        parser.add_argument(f"--{key}", type=float, help=f"{meta} (AU)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oscseg",
        description="Image segmentation with frequency locking of coupled "
                    "oscillator grids")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-synthetic", help="generate built-in test images")
    p.add_argument("--kind", choices=("quadrant", "two-region"),
                   default="quadrant")
    p.add_argument("--side", type=int, default=16)
    p.add_argument("--levels", type=int, default=None,
                   help="intensity levels per quadrant")
    p.add_argument("--intensities", default="0.3,0.7",
                   help="two-region intensities a,b")
    p.add_argument("--noise-variance", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_gen_synthetic)

    p = sub.add_parser("segment", help="segment one image")
    p.add_argument("--input", required=True, help="input PGM image")
    p.add_argument("--ref", help="reference mask PGM for scoring")
    p.add_argument("--mode", choices=("otsu-binary", "gap-cluster"),
                   help="segmentation mode (default otsu-binary, or "
                        "gap-cluster when --gap-threshold is given)")
    p.add_argument("--threshold", type=float,
                   help="fixed binary threshold on frequencies")
    p.add_argument("--gap-threshold", type=float,
                   help="frequency gap that separates clusters")
    _add_common(p)
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("sweep", help="coupling x threshold grid")
    p.add_argument("--input", required=True)
    p.add_argument("--couplings", required=True,
                   help="comma list of coupling coefficients")
    p.add_argument("--thresholds", required=True,
                   help="comma list of gap thresholds")
    p.add_argument("--relative", action="store_true",
                   help="thresholds are fractions of the median frequency")
    p.add_argument("--workers", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("noise-study",
                       help="error vs noise variance per method")
    p.add_argument("--input", required=True)
    p.add_argument("--ref", help="ground-truth mask PGM")
    p.add_argument("--variances", required=True,
                   help="comma list of Gaussian variances")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--trial-seeds",
                   help="explicit comma list of per-trial seeds")
    p.add_argument("--methods", default="neural,bz,mems,otsu")
    p.add_argument("--thresholds", choices=("auto", "tuned"))
    p.add_argument("--workers", type=int, default=1)
    _add_common(p, with_model=False)
    p.set_defaults(func=_cmd_noise_study)

    p = sub.add_parser("compare", help="per-image mislabel rates per method")
    p.add_argument("--images", required=True, help="comma list of PGM files")
    p.add_argument("--refs", required=True,
                   help="comma list of reference masks")
    p.add_argument("--methods", default="neural,bz,mems,otsu")
    p.add_argument("--thresholds", choices=("auto", "tuned"))
    p.add_argument("--workers", type=int, default=1)
    _add_common(p, with_model=False)
    p.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NumericalBlowup, DegenerateValues) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (PgmError, OSError) as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
