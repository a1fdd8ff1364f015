"""Command-line front end: train / sample / baseline / eval / reproduce.

Data goes to files or standard output, diagnostics to standard error, and
the exit code is zero exactly when no error occurred.  Every run logs its
fully resolved configuration to standard error.
"""

import argparse
import os
import sys

import numpy as np

from . import baselines, evaluation, presets
from .config import ConfigError, load_config, resolve_config
from .grids import EvalGrid, EvalGrid2d
from .loss import KdeConfig
from .targets import make_target, tabulate, target_names
from .trainer import load_checkpoint, sample_model, train, write_history_csv


def _fmt(x):
    return f"{float(x):.17g}"


def _log(msg):
    print(msg, file=sys.stderr)


def _write_rows(path, header, rows):
    """CSV with a header row; path None writes to standard output."""
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _write_samples(path, samples):
    samples = np.asarray(samples)
    if samples.ndim == 1:
        _write_rows(path, "y", ((float(v),) for v in samples))
    else:
        _write_rows(path, "y1,y2", ((float(a), float(b)) for a, b in samples))


def read_samples_csv(path):
    """Samples file: one value (or y1,y2 pair) per line, optional header."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    rows = []
    width = None
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        try:
            values = [float(p) for p in parts]
        except ValueError:
            if line_no == 1:
                continue  # header row
            raise ValueError(f"{path}:{line_no}: malformed row {raw!r}") from None
        if width is None:
            width = len(values)
            if width not in (1, 2):
                raise ValueError(f"{path}:{line_no}: expected 1 or 2 columns")
        elif len(values) != width:
            raise ValueError(f"{path}:{line_no}: expected {width} columns")
        rows.append(values)
    if not rows:
        raise ValueError(f"{path}: no samples found")
    data = np.asarray(rows)
    return data[:, 0] if width == 1 else data


def _target_from_args(args):
    params = {"b": args.b} if args.target == "y2exp" else {}
    return make_target(args.target, **params)


def _grid_from_args(args, target=None):
    lo, hi = args.grid_lo, args.grid_hi
    if lo is None or hi is None:
        if target is None:
            raise ValueError("need --grid-lo/--grid-hi (no target to take bounds from)")
        (tlo, thi) = target.bounds[0]
        lo = tlo if lo is None else lo
        hi = thi if hi is None else hi
    return EvalGrid(lo, hi, args.grid_points)


def _collect_overrides(extras):
    overrides = {}
    it = iter(extras)
    for item in it:
        if not item.startswith("--"):
            raise ConfigError(f"unexpected argument {item!r}")
        key = item[2:]
        value = next(it, None)
        if value is None:
            raise ConfigError(f"override {item!r} needs a value")
        overrides[key] = value
    return overrides


def cmd_train(args, extras):
    overrides = _collect_overrides(extras)
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.config is not None:
        run_cfg = load_config(args.config, overrides, log=_log)
    else:
        run_cfg = resolve_config({}, overrides, log=_log)
    cfg = run_cfg.train_config(checkpoint_path=args.checkpoint)
    model, history = train(cfg)
    write_history_csv(history, args.history)
    _log(f"wrote checkpoint {args.checkpoint} and history {args.history}")
    final = history[-1][1]
    print(
        f"final_loss,row={_fmt(final.row_term)},col={_fmt(final.col_term)},"
        f"well={_fmt(final.well_term)},total={_fmt(final.total)}"
    )
    return 0


def cmd_sample(args, extras):
    if extras:
        raise ConfigError(f"unexpected arguments {extras!r}")
    model = load_checkpoint(args.checkpoint)
    rng = np.random.default_rng(args.seed)
    samples = sample_model(model, args.count, rng, pairs=(args.dim == 2))
    _write_samples(args.out, samples)
    return 0


def cmd_baseline(args, extras):
    if extras:
        raise ConfigError(f"unexpected arguments {extras!r}")
    rng = np.random.default_rng(args.seed)
    report = None
    if args.method == "mixture":
        if args.modes:
            comps = []
            for part in args.modes.split(","):
                w, mu, sd = (float(v) for v in part.split(":"))
                comps.append((w, mu, sd))
        elif args.target == "bimodal_gauss":
            # Exact mixture representation of the built-in two-peak target.
            comps = [(0.5, 1.0, 0.5), (0.5, -3.0, 1.0)]
        else:
            raise ConfigError("mixture method needs --modes w:mu:sigma[,...]")
        spec = baselines.MixtureSpec(tuple(comps))
        samples = baselines.mixture_sample(spec, args.count, rng)
    else:
        target = _target_from_args(args)
        grid = _grid_from_args(args, target)
        if args.method == "inversion":
            samples = baselines.inversion_sample(target, grid, args.count, rng)
        elif args.method == "rejection":
            proposal = make_target(args.proposal)
            spec = baselines.make_rejection_spec(target, proposal, grid, args.safety)
            samples, rate = baselines.rejection_sample(target, spec, args.count, rng)
            report = f"acceptance_rate={_fmt(rate)} c={_fmt(spec.c)}"
        elif args.method == "mh":
            spec = baselines.MhSpec(
                sigma_q=args.sigma_q, y0=args.y0, burn_in=args.burn_in
            )
            samples = baselines.metropolis_hastings(target, spec, args.count, rng)
            report = f"burn_in={args.burn_in} sigma_q={_fmt(args.sigma_q)}"
        else:
            raise ConfigError(f"unknown method {args.method!r}")
    _write_samples(args.out, samples)
    if report:
        print(report) if args.out else _log(report)
    return 0


def cmd_eval(args, extras):
    if extras:
        raise ConfigError(f"unexpected arguments {extras!r}")
    samples = read_samples_csv(args.samples)
    cfg = KdeConfig(bandwidth=args.bandwidth, eps=args.eps)

    if args.mode == "histogram":
        target = _target_from_args(args) if args.target else None
        grid = _grid_from_args(args, target)
        hist = evaluation.histogram(samples, grid.lo, grid.hi, args.bins)
        if hist.overflow:
            _log(f"histogram: {hist.overflow} samples outside [{grid.lo}, {grid.hi}]")
        _write_rows(
            args.out,
            "bin_center,height",
            zip(map(float, hist.centers), map(float, hist.heights)),
        )
    elif args.mode == "kde":
        target = _target_from_args(args) if args.target else None
        grid = _grid_from_args(args, target)
        h = args.bandwidth
        if h is None:
            from .loss import silverman_bandwidth

            h = silverman_bandwidth(samples)
        from .loss import gaussian_kde

        values = gaussian_kde(samples, h, grid)
        _write_rows(args.out, "y,density", zip(map(float, grid.points), map(float, values)))
    elif args.mode == "kde2d":
        if samples.ndim != 2:
            raise ValueError("kde2d needs two-column samples")
        grid = EvalGrid2d.square(
            args.grid_lo if args.grid_lo is not None else -6.0,
            args.grid_hi if args.grid_hi is not None else 6.0,
            args.grid_points,
        )
        values = evaluation.kde_2d(samples, args.bandwidth, grid)
        m1, m2 = grid.meshes()
        _write_rows(
            args.out,
            "y1,y2,density",
            zip(map(float, m1.ravel()), map(float, m2.ravel()), map(float, values.ravel())),
        )
    elif args.mode == "jsd":
        if not args.target:
            raise ConfigError("jsd mode needs --target")
        target = _target_from_args(args)
        if target.dim == 2:
            grid = EvalGrid2d.square(
                args.grid_lo if args.grid_lo is not None else target.bounds[0][0],
                args.grid_hi if args.grid_hi is not None else target.bounds[0][1],
                args.grid_points,
            )
            value = evaluation.divergence_to_target_2d(
                samples, tabulate(target, grid), grid, cfg
            )
        else:
            grid = _grid_from_args(args, target)
            value = evaluation.divergence_to_target(
                samples, tabulate(target, grid), grid, cfg
            )
        print(_fmt(value))
    elif args.mode == "scatter":
        if args.i is None or args.j is None:
            raise ConfigError("scatter mode needs --i and --j column indices")
        if samples.ndim != 2:
            raise ValueError("scatter mode needs a multi-column batch file")
        pairs, r = evaluation.dependence_scatter(samples, args.i, args.j)
        _log(f"pearson_r={_fmt(r)}")
        _write_rows(args.out, "y_i,y_j", ((float(a), float(b)) for a, b in pairs))
    else:
        raise ConfigError(f"unknown eval mode {args.mode!r}")
    return 0


def _reproduce_fig1(outdir, scale, seed):
    cfg = presets.fig1_train_config(scale, seed)
    grid = EvalGrid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
    target = make_target(cfg.target_name, **cfg.target_params)
    tab = tabulate(target, grid)
    _write_rows(
        os.path.join(outdir, "target.csv"),
        "y,density",
        zip(map(float, grid.points), map(float, tab)),
    )

    model, _ = train(cfg)
    rng = np.random.default_rng(seed + 1)
    n_vectors = 500
    from .nn import forward

    x = rng.uniform(-1.0, 1.0, size=(n_vectors, cfg.input_dim))
    outputs, _ = forward(model, x)
    model_kde = evaluation.mean_kde(outputs, grid)
    _write_rows(
        os.path.join(outdir, "model_mean_kde.csv"),
        "y,density",
        zip(map(float, grid.points), map(float, model_kde)),
    )

    spec = baselines.MixtureSpec(((0.5, 1.0, 0.5), (0.5, -3.0, 1.0)))
    mix_vectors = baselines.mixture_sample(spec, n_vectors * cfg.input_dim, rng)
    mix_kde = evaluation.mean_kde(mix_vectors.reshape(n_vectors, cfg.input_dim), grid)
    _write_rows(
        os.path.join(outdir, "mixture_mean_kde.csv"),
        "y,density",
        zip(map(float, grid.points), map(float, mix_kde)),
    )

    i, j = rng.choice(cfg.input_dim, size=2, replace=False)
    pairs, r = evaluation.dependence_scatter(outputs, int(i), int(j))
    _write_rows(
        os.path.join(outdir, "scatter.csv"),
        "y_i,y_j",
        ((float(a), float(b)) for a, b in pairs),
    )
    _write_rows(
        os.path.join(outdir, "scatter_meta.csv"),
        "i,j,pearson_r",
        [(int(i), int(j), float(r))],
    )


def _hist_rows(samples, grid, bins=100):
    hist = evaluation.histogram(samples, grid.lo, grid.hi, bins)
    return zip(map(float, hist.centers), map(float, hist.heights))


def _reproduce_fig2(outdir, scale, seed):
    cfg = presets.fig2_train_config(scale, seed)
    grid = EvalGrid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
    target = make_target(cfg.target_name, **cfg.target_params)
    tab = tabulate(target, grid)
    _write_rows(
        os.path.join(outdir, "target.csv"),
        "y,density",
        zip(map(float, grid.points), map(float, tab)),
    )
    model, _ = train(cfg)
    rng = np.random.default_rng(seed + 1)
    n = 10_000
    model_samples = sample_model(model, n, rng)
    _write_rows(os.path.join(outdir, "model_hist.csv"), "bin_center,height",
                _hist_rows(model_samples, grid))
    inv_samples = baselines.inversion_sample(target, grid, n, rng)
    _write_rows(os.path.join(outdir, "inversion_hist.csv"), "bin_center,height",
                _hist_rows(inv_samples, grid))


def _reproduce_fig3(outdir, scale, seed):
    cfg = presets.fig3_train_config(scale, seed)
    grid = EvalGrid(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
    target = make_target(cfg.target_name, **cfg.target_params)
    tab = tabulate(target, grid)
    _write_rows(
        os.path.join(outdir, "target.csv"),
        "y,density",
        zip(map(float, grid.points), map(float, tab)),
    )
    model, _ = train(cfg)
    rng = np.random.default_rng(seed + 1)
    n = 10_000
    model_samples = sample_model(model, n, rng)
    _write_rows(os.path.join(outdir, "model_hist.csv"), "bin_center,height",
                _hist_rows(model_samples, grid))
    spec = baselines.make_rejection_spec(target, make_target("laplace"), grid)
    rej_samples, rate = baselines.rejection_sample(target, spec, n, rng)
    _log(f"rejection acceptance_rate={_fmt(rate)} (c={_fmt(spec.c)})")
    _write_rows(os.path.join(outdir, "rejection_hist.csv"), "bin_center,height",
                _hist_rows(rej_samples, grid))
    mh_spec = baselines.MhSpec(sigma_q=0.5, burn_in=1000)
    mh_samples = baselines.metropolis_hastings(target, mh_spec, n, rng)
    _write_rows(os.path.join(outdir, "mh_hist.csv"), "bin_center,height",
                _hist_rows(mh_samples, grid))


def _reproduce_fig4(outdir, scale, seed):
    cfg = presets.fig4_train_config(scale, seed)
    target = make_target(cfg.target_name, **cfg.target_params)
    eval_grid = EvalGrid2d.square(-6.0, 6.0, 121)
    tab = tabulate(target, eval_grid)
    m1, m2 = eval_grid.meshes()
    _write_rows(
        os.path.join(outdir, "target2d.csv"),
        "y1,y2,density",
        zip(map(float, m1.ravel()), map(float, m2.ravel()), map(float, tab.ravel())),
    )
    model, _ = train(cfg)
    rng = np.random.default_rng(seed + 1)
    points = sample_model(model, 10_000, rng, pairs=True)
    kde = evaluation.kde_2d(points, None, eval_grid)
    _write_rows(
        os.path.join(outdir, "model_kde2d.csv"),
        "y1,y2,density",
        zip(map(float, m1.ravel()), map(float, m2.ravel()), map(float, kde.ravel())),
    )


_REPRODUCERS = {
    "fig1": _reproduce_fig1,
    "fig2": _reproduce_fig2,
    "fig3": _reproduce_fig3,
    "fig4": _reproduce_fig4,
}


def cmd_reproduce(args, extras):
    if extras:
        raise ConfigError(f"unexpected arguments {extras!r}")
    os.makedirs(args.outdir, exist_ok=True)
    _log(f"reproduce {args.figure} at scale {args.scale} -> {args.outdir}")
    _REPRODUCERS[args.figure](args.outdir, args.scale, args.seed)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="nnsampler",
        description="Neural sampler for explicitly known densities, with "
        "classical baselines and evaluation tools.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--checkpoint", default="model.ckpt")
    p.add_argument("--history", default="history.csv")
    p.set_defaults(func=cmd_train, allow_extras=True)

    p = sub.add_parser("sample", help="draw samples from a trained model")
    p.add_argument("checkpoint")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, choices=(1, 2), default=1,
                   help="2 interprets consecutive outputs as (y1, y2) pairs")
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_sample, allow_extras=False)

    p = sub.add_parser("baseline", help="run a conventional sampler")
    p.add_argument("--method", required=True,
                   choices=("inversion", "rejection", "mixture", "mh"))
    p.add_argument("--target", default="laplace", choices=target_names())
    p.add_argument("--b", type=float, default=1.0, help="y2exp shape parameter")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-lo", type=float)
    p.add_argument("--grid-hi", type=float)
    p.add_argument("--grid-points", type=int, default=8193)
    p.add_argument("--proposal", default="laplace", choices=target_names(),
                   help="rejection proposal density")
    p.add_argument("--safety", type=float, default=1.01,
                   help="rejection envelope safety factor")
    p.add_argument("--modes", help="mixture components w:mu:sigma[,w:mu:sigma...]")
    p.add_argument("--burn-in", type=int, default=1000)
    p.add_argument("--sigma-q", type=float, default=0.5)
    p.add_argument("--y0", type=float)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_baseline, allow_extras=False)

    p = sub.add_parser("eval", help="evaluate a samples file")
    p.add_argument("samples")
    p.add_argument("--mode", required=True,
                   choices=("histogram", "kde", "kde2d", "jsd", "scatter"))
    p.add_argument("--target", choices=target_names())
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--grid-lo", type=float)
    p.add_argument("--grid-hi", type=float)
    p.add_argument("--grid-points", type=int, default=401)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--i", type=int)
    p.add_argument("--j", type=int)
    p.add_argument("--bandwidth", type=float)
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--out", help="output CSV (default: stdout)")
    p.set_defaults(func=cmd_eval, allow_extras=False)

    p = sub.add_parser("reproduce", help="regenerate the data behind a figure")
    p.add_argument("--figure", required=True, choices=sorted(_REPRODUCERS))
    p.add_argument("--scale", default="desk", choices=presets.SCALES)
    p.add_argument("--outdir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_reproduce, allow_extras=False)

    return parser


def main(argv=None):
    parser = build_parser()
    args, extras = parser.parse_known_args(argv)
    if extras and not args.allow_extras:
        _log(f"error: unexpected arguments {extras!r}")
        return 2
    try:
        return args.func(args, extras)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # noqa: BLE001 - single reporting point
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
