"""Command-line front end.

    oversparse coherence   --size 256 --ratio 0.5 --trials 200 --kind all
    oversparse reconstruct IMAGE|@fixture [--kind dt-complex] [--domain frequency]
    oversparse sweep       IMAGE|@fixture [--domain physical --ratio 0.8]
    oversparse metrics     REF REC

Exit codes: 0 success, 1 usage/configuration, 2 I/O, 3 numerical failure.
Every command prints one JSON line echoing its effective configuration, and
all CSV floats use the shortest round-trip decimal ("inf" for infinite SNR).
"""

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .coherence import DEFAULT_BATCH, estimate_coherence_mc
from .errors import (DimensionError, DivergenceError, DomainError, FormatError,
                     OversparseError, SubbandError)
from .fixtures import FIXTURES, load_fixture
from .imageio import SCALES, Image, center_crop_pow2, is_pow2, read_image, write_image
from .metrics import evaluate, format_float, trace_summary
from .recon import (DEFAULT_DECAY_FINAL, DEFAULT_EPSILON, DEFAULT_MAX_ITER, ReconParams,
                    default_lambda, pocs_reconstruct)
from .sensing import SCHEMES, Domain, make_mask, sense, write_mask
from .transforms import TransformKind, check_layout

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

# coherence compares four dictionaries; the double-density dual-tree one is
# the real grouping (32 oriented real wavelets per level)
COHERENCE_KINDS = (TransformKind.DWT, TransformKind.DT_COMPLEX, TransformKind.DD_DWT,
                   TransformKind.DD_DT_REAL)
SWEEP_KINDS = tuple(TransformKind)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_seed():
    raw = os.environ.get("OVERSPARSE_SEED")
    if raw is None or raw.strip() == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"OVERSPARSE_SEED must be an integer, got {raw!r}") from None


def parse_kinds(text, allowed):
    if text == "all":
        return list(allowed)
    kinds = [TransformKind.parse(t) for t in text.split(",") if t.strip()]
    if not kinds:
        raise UsageError("no transform kind given")
    return kinds


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def write_csv(path, header, rows):
    """Write rows atomically (temp file + rename), LF line endings."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    os.replace(tmp, path)


def _json_safe(obj):
    if isinstance(obj, float) and not np.isfinite(obj):
        return format_float(obj)
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def emit(record, stream=None):
    print(json.dumps(_json_safe(record), sort_keys=True), file=stream or sys.stdout, flush=True)


def _out_path(args, name):
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, name)


# -- image loading ------------------------------------------------------------

def load_input(spec, size, crop):
    """Read ``spec`` (a path, or ``@phantom`` / ``@texture``) as an Image."""
    if spec.startswith("@"):
        name = spec[1:]
        if name not in FIXTURES:
            raise UsageError(f"unknown fixture {name!r}; choose from {', '.join(FIXTURES)}")
        img = Image(load_fixture(name, size), "unit")
    else:
        img = read_image(spec)
    h, w = img.pixels.shape
    if not (is_pow2(h) and is_pow2(w)):
        if not crop:
            raise DimensionError(f"image is {w}x{h}; dimensions must be powers of two "
                                 f"(use --crop)")
        img = Image(np.ascontiguousarray(center_crop_pow2(img.pixels)), img.scale)
    return img


# -- commands -----------------------------------------------------------------

def cmd_coherence(args):
    seed = args.seed
    kinds = parse_kinds(args.kind, COHERENCE_KINDS)
    shape = (args.size, args.size)
    check_layout(shape, args.levels)
    mask = make_mask(args.size, args.size, args.ratio, Domain.FREQUENCY, args.scheme, seed,
                     args.density_exp)
    config = {"command": "coherence", "kinds": [k.value for k in kinds], "size": args.size,
              "levels": args.levels, "ratio": args.ratio, "scheme": args.scheme,
              "density_exp": args.density_exp, "trials": args.trials, "batch": args.batch,
              "band": args.band, "seed": seed, "out_dir": args.out_dir,
              "version": __version__}
    emit({"config": config})
    rows = []
    for kind in kinds:
        est = estimate_coherence_mc(kind, args.levels, shape, mask, args.trials, seed=seed,
                                    batch=args.batch, band=args.band)
        rows.append(est.csv_row() + [est.batch, est.rejected])
        if args.per_trial:
            write_csv(_out_path(args, f"coherence_trials_{kind.value}.csv"), ["trial", "v"],
                      [[i, v] for i, v in enumerate(est.values)])
        emit({"kind": kind.value, "mu_tilde": est.mu_tilde, "rejected": est.rejected})
    path = args.csv or _out_path(args, "coherence.csv")
    write_csv(path, ["kind", "ratio", "trials", "seed", "mu_tilde", "batch", "rejected"], rows)
    return EXIT_OK


def _measure(args, img):
    h, w = img.pixels.shape
    check_layout((h, w), args.levels)
    domain = Domain(args.domain)
    scheme = args.scheme
    mask = make_mask(w, h, args.ratio, domain, scheme, args.seed, args.density_exp)
    meas = sense(img.pixels, mask, args.sigma, args.seed)
    if args.save_mask:
        write_mask(_out_path(args, "mask.pbm"), mask)
    return meas


def _params(args, kind):
    schedule = "fixed"
    if args.lambda_decay is not None:
        schedule = f"{args.lambda_schedule}-decay"
    return ReconParams(kind=kind, levels=args.levels, lam=args.lam, schedule=schedule,
                       decay_final=(args.lambda_decay if args.lambda_decay is not None
                                    else DEFAULT_DECAY_FINAL),
                       epsilon=args.epsilon, max_iter=args.max_iter, domain=Domain(args.domain),
                       threshold_lowpass=args.threshold_lowpass)


def _run_one(args, img, meas, kind, tag):
    params = _params(args, kind)
    res = pocs_reconstruct(meas, params, reference=img.pixels)
    report = evaluate(img.pixels, res.image, img.scale)
    summ = trace_summary(res.trace, params.epsilon)
    rows = [[i + 1, c, e] for i, (c, e) in enumerate(zip(res.trace, res.rmse_trace))]
    write_csv(_out_path(args, f"trace_{tag}.csv"), ["iteration", "change", "rmse"], rows)
    ext = ".pgm" if img.scale != "unit" else ".raw"
    write_image(_out_path(args, f"recon_{tag}{ext}"), Image(res.image, img.scale))
    record = res.summary()
    record.update({"kind": kind.value, "rmse": report.rmse, "snr_db": report.snr_db,
                   "knee": summ.knee, "scale": img.scale})
    return res, report, record


def _common_config(args, command, kinds):
    return {"command": command, "input": args.image, "kinds": [k.value for k in kinds],
            "levels": args.levels, "ratio": args.ratio, "domain": args.domain,
            "scheme": args.scheme, "density_exp": args.density_exp, "sigma": args.sigma,
            "lambda": args.lam, "lambda_decay": args.lambda_decay,
            "lambda_schedule": args.lambda_schedule, "threshold_lowpass": args.threshold_lowpass,
            "epsilon": args.epsilon,
            "max_iter": args.max_iter, "seed": args.seed, "crop": args.crop,
            "size": args.size, "out_dir": args.out_dir, "version": __version__}


def cmd_reconstruct(args):
    kind = TransformKind.parse(args.kind)
    img = load_input(args.image, args.size, args.crop)
    meas = _measure(args, img)
    config = _common_config(args, "reconstruct", [kind])
    if args.lam is None:
        config["lambda_effective"] = default_lambda(meas, kind, args.levels)
    emit({"config": config})
    res, report, record = _run_one(args, img, meas, kind, kind.value)
    emit(record)
    if args.csv:
        write_csv(args.csv, ["transform", "rmse", "snr_db", "iterations", "converged", "seed"],
                  [[kind.value, report.rmse, report.snr_db, res.iterations, res.converged,
                    args.seed]])
    return EXIT_OK


def cmd_sweep(args):
    kinds = parse_kinds(args.kind, SWEEP_KINDS)
    img = load_input(args.image, args.size, args.crop)
    # one measurement set shared by every row
    meas = _measure(args, img)
    emit({"config": _common_config(args, "sweep", kinds)})
    rows, failed = [], False
    for kind in kinds:
        try:
            res, report, record = _run_one(args, img, meas, kind, kind.value)
        except DivergenceError as exc:
            failed = True
            print(f"sweep: {kind.value}: {exc}", file=sys.stderr)
            rows.append([kind.value, float("nan"), float("nan"), 0, False, args.seed])
            continue
        emit(record)
        rows.append([kind.value, report.rmse, report.snr_db, res.iterations, res.converged,
                     args.seed])
    write_csv(args.csv or _out_path(args, "sweep.csv"),
              ["transform", "rmse", "snr_db", "iterations", "converged", "seed"], rows)
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_metrics(args):
    ref = load_input(args.reference, args.size, False) if args.reference.startswith("@") \
        else read_image(args.reference)
    rec = read_image(args.reconstruction)
    if args.scale:
        ref, rec = Image(ref.pixels, args.scale), Image(rec.pixels, args.scale)
    if ref.scale != rec.scale:
        raise UsageError(f"scale mismatch {ref.scale} vs {rec.scale}; pass --scale to override")
    if ref.pixels.shape != rec.pixels.shape:
        raise DimensionError(f"shape mismatch {ref.pixels.shape} vs {rec.pixels.shape}")
    report = evaluate(ref.pixels, rec.pixels, ref.scale)
    emit({"config": {"command": "metrics", "reference": args.reference,
                     "reconstruction": args.reconstruction, "scale": ref.scale},
          "rmse": report.rmse, "snr_db": report.snr_db})
    if args.csv:
        write_csv(args.csv, ["reference", "reconstruction", "rmse", "snr_db", "scale"],
                  [[args.reference, args.reconstruction, report.rmse, report.snr_db,
                    report.scale]])
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------

def _ratio(text):
    v = float(text)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError(f"ratio must be in (0, 1], got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return v


def build_parser():
    p = _Parser(prog="oversparse", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, kind_default):
        sp.add_argument("--kind", "--kinds", dest="kind", default=kind_default,
                        help="transform kind, comma list, or 'all'")
        sp.add_argument("--levels", type=_positive_int, default=3)
        sp.add_argument("--ratio", type=_ratio, default=0.5, help="kept fraction in (0, 1]")
        sp.add_argument("--scheme", choices=SCHEMES, default="uniform")
        sp.add_argument("--density-exp", type=float, default=2.0,
                        help="exponent of the variable-density radial law")
        sp.add_argument("--seed", type=int, default=None,
                        help="mask/noise seed (default: $OVERSPARSE_SEED or 0)")
        sp.add_argument("--size", type=_positive_int, default=256,
                        help="image size for synthetic runs and fixtures")
        sp.add_argument("--out-dir", default=".")
        sp.add_argument("--csv", default=None, help="CSV destination")

    c = sub.add_parser("coherence", help="Monte-Carlo mutual coherence per transform")
    common(c, "all")
    c.add_argument("--trials", type=_positive_int, default=200)
    c.add_argument("--batch", type=_positive_int, default=DEFAULT_BATCH)
    c.add_argument("--band", choices=("hh", "all"), default="hh")
    c.add_argument("--per-trial", action="store_true", help="also write per-trial v_i CSVs")
    c.set_defaults(func=cmd_coherence, domain="frequency")

    def recon_opts(sp):
        sp.add_argument("image", help="PGM/raw image path, or @phantom / @texture")
        sp.add_argument("--domain", choices=[d.value for d in Domain], default="frequency")
        sp.add_argument("--sigma", type=_nonneg, default=0.0)
        sp.add_argument("--lambda", dest="lam", type=_nonneg, default=None,
                        help="absolute threshold (default: data-adaptive)")
        sp.add_argument("--lambda-decay", type=_ratio, default=None, metavar="FINAL",
                        help="decay lambda to FINAL x lambda over max-iter")
        sp.add_argument("--lambda-schedule", choices=("linear", "geometric"), default="linear",
                        help="shape of the --lambda-decay ramp")
        sp.add_argument("--threshold-lowpass", action="store_true",
                        help="also shrink the low-pass residual")
        sp.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
        sp.add_argument("--max-iter", type=_positive_int, default=DEFAULT_MAX_ITER)
        sp.add_argument("--crop", action="store_true",
                        help="centre-crop to power-of-two dimensions")
        sp.add_argument("--save-mask", action="store_true", help="write mask.pbm")

    r = sub.add_parser("reconstruct", help="POCS reconstruction of one image")
    common(r, "dt-complex")
    recon_opts(r)
    r.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("sweep", help="reconstruct with every transform on shared measurements")
    common(s, "all")
    recon_opts(s)
    s.set_defaults(func=cmd_sweep)

    m = sub.add_parser("metrics", help="RMS error and SNR between two images")
    m.add_argument("reference")
    m.add_argument("reconstruction")
    m.add_argument("--scale", choices=sorted(SCALES), default=None,
                   help="override the value-range tag of both images")
    m.add_argument("--size", type=_positive_int, default=256)
    m.add_argument("--csv", default=None)
    m.set_defaults(func=cmd_metrics)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = default_seed()
        if getattr(args, "epsilon", 1.0) <= 0:
            raise UsageError("--epsilon must be > 0")
        return args.func(args)
    except (FormatError, OSError) as exc:
        print(f"oversparse: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, DimensionError, DomainError, SubbandError, ValueError) as exc:
        print(f"oversparse: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, OversparseError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"oversparse: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
