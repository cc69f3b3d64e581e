"""Command-line entry point: ``spikesvd <subcommand> [flags]``.

Exit status is 0 on success, 1 on a validation error (one diagnostic line on
stderr) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bench import run_bench
from .cluster import align_epochs, kmeans, sort_order, zscore_rows
from .detector import PeakSet, detect_all, extract_epochs
from .metrics import gof, match_events, precision
from .pipeline import concat_recordings, run_session, split_peaks, split_rows
from .sigio import (EventList, RunConfig, ValidationError, read_events, read_recording,
                    write_events, write_recording)
from .simgen import SimSpec, simulate
from .svdsep import despike
from .topomap import dipolarity, interpolate

log = logging.getLogger("spikesvd")

# sub-seed offsets derived from --seed
SIM_SEED_OFFSET = 0
CLUSTER_SEED_OFFSET = 1000
BENCH_SEED_OFFSET = 2000


def _default_jobs():
    return len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _config(args) -> RunConfig:
    return RunConfig.from_json(
        args.config,
        d=getattr(args, "d", None), refractory_ms=getattr(args, "refractory_ms", None),
        epoch_ms=getattr(args, "epoch_ms", None), rank=getattr(args, "rank", None),
        match_tol_ms=getattr(args, "match_tol_ms", None), seed=getattr(args, "seed", None))


def _stem(path) -> str:
    name = Path(path).name
    return name[:-4] if name.endswith(".csv") else name


def _write_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


def _sim_spec(args, cfg: RunConfig, snr) -> SimSpec:
    kw = dict(snr_db=float(snr), n_realizations=args.realizations,
              seed=cfg.seed + SIM_SEED_OFFSET, epoch_ms=cfg.epoch_ms)
    if args.freqs:
        kw["freqs"] = tuple(args.freqs)
    if args.burst_amplitude is not None:
        kw["burst_amplitude"] = args.burst_amplitude
    return SimSpec(**kw)


def cmd_simulate(args):
    cfg = _config(args)
    out = _out_dir(args)
    manifest = {"trials": []}
    for snr in args.snr:
        spec = _sim_spec(args, cfg, snr)
        for r in range(spec.n_realizations):
            stem = f"sim_snr{snr:g}_r{r:03d}"
            mix, truth = simulate(spec, r)
            write_recording(mix, out / f"{stem}.csv")
            write_recording(truth.transient, out / f"{stem}.truth.transient.csv")
            write_recording(truth.oscillation, out / f"{stem}.truth.oscillation.csv")
            write_recording(truth.noise, out / f"{stem}.truth.noise.csv")
            write_events(truth.true_peaks, out / f"{stem}.truth.events.csv")
            manifest["trials"].append({"stem": stem, "snr_db": spec.snr_db,
                                       "realization": r, "freqs": list(spec.freqs)})
    (out / "simulation.json").write_text(json.dumps(manifest, indent=2) + "\n")


def cmd_detect(args):
    cfg = _config(args)
    out = _out_dir(args)
    recs = [read_recording(p) for p in args.recordings]
    session = concat_recordings(recs)
    peaks = detect_all(session, d=cfg.d, refractory_ms=cfg.refractory_ms)
    for path, part in zip(args.recordings, split_peaks(peaks, [r.n_samples for r in recs])):
        write_events(part.to_events(), out / f"{_stem(path)}.events.csv")


def cmd_despike(args):
    cfg = _config(args)
    out = _out_dir(args)
    if len(args.events) != len(args.recordings):
        raise ValidationError("give one --events file per recording")
    recs = [read_recording(p) for p in args.recordings]
    lengths = [r.n_samples for r in recs]
    offsets = np.cumsum([0] + lengths[:-1])
    per_channel = [[] for _ in range(recs[0].n_channels)]
    for rec, off, ev_path in zip(recs, offsets, args.events):
        ev = read_events(ev_path, rec)
        for ch in range(rec.n_channels):
            per_channel[ch].append(ev.samples(ch) + off)
    peaks = PeakSet(tuple(np.concatenate(p) for p in per_channel))
    sep = despike(concat_recordings(recs), peaks, cfg, jobs=args.jobs)
    for path, rec, tr, res in zip(args.recordings, recs,
                                  split_rows(sep.transient.data, lengths),
                                  split_rows(sep.residual.data, lengths)):
        write_recording(rec.with_data(tr), out / f"{_stem(path)}.transient.csv")
        write_recording(rec.with_data(res), out / f"{_stem(path)}.residual.csv")


def cmd_evaluate(args):
    cfg = _config(args)
    out = _out_dir(args)
    sim_dir, res_dir = Path(args.sim_dir), Path(args.result_dir)
    manifest = json.loads((sim_dir / "simulation.json").read_text())
    fits, counts, names = {}, {}, None
    for trial in manifest["trials"]:
        stem = trial["stem"]
        truth = read_recording(sim_dir / f"{stem}.truth.transient.csv")
        est = read_recording(res_dir / f"{stem}.transient.csv")
        names = truth.names
        true_ev = read_events(sim_dir / f"{stem}.truth.events.csv", truth)
        det_ev = read_events(res_dir / f"{stem}.events.csv", truth)
        for ch, f0 in enumerate(trial["freqs"]):
            key = (ch, trial["snr_db"], f0)
            fits.setdefault(key, []).append(gof(truth.data[:, ch], est.data[:, ch]).fit)
            tp, fp, fn, _ = match_events(det_ev.samples(ch), true_ev.samples(ch),
                                         truth.fs, cfg.match_tol_ms)
            c = counts.setdefault(ch, [0, 0, 0])
            c[0] += tp
            c[1] += fp
            c[2] += fn
    _write_csv(out / "gof.csv",
               ({"channel": names[ch], "snr_db": snr, "freq_hz": f0,
                 "fit_mean": float(np.mean(v)), "fit_std": float(np.std(v)), "n": len(v)}
                for (ch, snr, f0), v in sorted(fits.items())),
               ["channel", "snr_db", "freq_hz", "fit_mean", "fit_std", "n"])
    _write_csv(out / "detection.csv",
               ({"Channel": names[ch], "TP": tp, "FP": fp,
                 "P": round(precision(tp, fp), 2) if tp + fp else ""}
                for ch, (tp, fp, fn) in sorted(counts.items())),
               ["Channel", "TP", "FP", "P"])


def cmd_pipeline(args):
    cfg = _config(args)
    out = _out_dir(args)
    gof_rows, det_rows = [], []
    for snr in args.snr:
        session = run_session(_sim_spec(args, cfg, snr), cfg, jobs=args.jobs)
        gof_rows.extend(session.gof_rows())
        names = session.separation.transient.names
        for row in session.detection_rows(names):
            det_rows.append({"snr_db": session.spec.snr_db, **row})
    _write_csv(out / "gof.csv", gof_rows, ["snr_db", "freq_hz", "fit_mean", "fit_std"])
    _write_csv(out / "detection.csv", det_rows, ["snr_db", "Channel", "TP", "FP", "P"])
    (out / "config.json").write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")


def cmd_cluster(args):
    cfg = _config(args)
    out = _out_dir(args)
    rec = read_recording(args.recording)
    events = read_events(args.events, rec)
    ch = args.channel
    if not 0 <= ch < rec.n_channels:
        raise ValidationError(f"channel {ch} out of range")
    epochs = extract_epochs(rec.data[:, ch], events.samples(ch), rec.fs, cfg.epoch_ms, ch)
    if epochs.n_epochs < args.k:
        raise ValidationError(f"{epochs.n_epochs} epochs on channel {ch}, fewer than k={args.k}")
    aligned, shifts = align_epochs(epochs)
    feats = zscore_rows(aligned) if args.zscore else aligned.X
    result = kmeans(feats, k=args.k, seed=cfg.seed + CLUSTER_SEED_OFFSET, n_init=args.n_init)
    order = sort_order(epochs, key=args.sort)
    position = np.empty_like(order)
    position[order] = np.arange(order.size)
    _write_csv(out / "assignments.csv",
               ({"epoch_index": i, "peak_sample": int(epochs.peak_samples[i]),
                 "cluster": int(result.assignments[i]), "shift": int(shifts[i]),
                 "sort_position": int(position[i])} for i in range(epochs.n_epochs)),
               ["epoch_index", "peak_sample", "cluster", "shift", "sort_position"])
    np.savetxt(out / "centroids.csv", result.centroids, fmt="%.17g", delimiter=",")


def cmd_topo(args):
    rec = read_recording(args.recording)
    if not 0 <= args.sample < rec.n_samples:
        raise ValidationError(f"sample {args.sample} out of range")
    if not 0 <= args.channel < rec.n_channels:
        raise ValidationError(f"channel {args.channel} out of range")
    out = _out_dir(args)
    topo = interpolate(rec.data[args.sample], rec.positions(), G=args.grid)
    score = dipolarity(topo)
    with open(out / "topo.csv", "w") as fh:
        for row in topo.grid:
            fh.write(",".join("" if np.isnan(v) else "%.17g" % v for v in row) + "\n")
    summary = {"anchor": {"channel": rec.names[args.channel], "sample": args.sample},
               "score": score.score, "n_pos_regions": score.n_pos_regions,
               "n_neg_regions": score.n_neg_regions,
               "extrema": {"max": score.vmax, "min": score.vmin}}
    (out / "topo.json").write_text(json.dumps(summary, indent=2) + "\n")


def cmd_bench(args):
    seed = (args.seed if args.seed is not None else 0) + BENCH_SEED_OFFSET
    report = run_bench(n_channels=args.channels, window_len=args.window_len,
                       n_windows=args.windows, workers=args.workers or args.jobs,
                       seed=seed, epochs_per_window=args.epochs_per_window)
    print(json.dumps(report.to_dict(), indent=2))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration; flags override it")
    common.add_argument("--seed", type=int, help="master random seed")
    common.add_argument("--jobs", type=int, default=_default_jobs(),
                        help="worker count for parallel-capable steps")
    common.add_argument("-v", "--verbose", action="store_true")

    detect = argparse.ArgumentParser(add_help=False)
    detect.add_argument("--d", type=float, help="threshold width in IQR units (default 3)")
    detect.add_argument("--refractory-ms", type=float, help="minimum peak spacing (default 10)")

    sep = argparse.ArgumentParser(add_help=False)
    sep.add_argument("--epoch-ms", type=float, help="event window length (default 300)")
    sep.add_argument("--rank", type=int, help="retained SVD components (default 3)")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--snr", type=float, nargs="+", default=[10.0], help="SNR level(s) in dB")
    sim.add_argument("--realizations", type=int, default=100)
    sim.add_argument("--freqs", type=float, nargs="+", help="gamma frequencies in Hz")
    sim.add_argument("--burst-amplitude", type=float,
                     help="gamma burst amplitude relative to the unit transient")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", required=True, help="output directory")

    p = argparse.ArgumentParser(prog="spikesvd", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("simulate", parents=[common, sim, out],
                       help="write simulated trials and ground truth")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("detect", parents=[common, detect, out],
                       help="detect transient peaks; several recordings form one session")
    s.add_argument("recordings", nargs="+")
    s.set_defaults(func=cmd_detect)

    s = sub.add_parser("despike", parents=[common, sep, out],
                       help="split recordings into transient and residual parts")
    s.add_argument("recordings", nargs="+")
    s.add_argument("--events", nargs="+", required=True, help="one event file per recording")
    s.set_defaults(func=cmd_despike)

    s = sub.add_parser("evaluate", parents=[common, out],
                       help="score despike/detect results against simulation truth")
    s.add_argument("--sim-dir", required=True)
    s.add_argument("--result-dir", required=True)
    s.add_argument("--match-tol-ms", type=float, help="event matching tolerance (default 50)")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("pipeline", parents=[common, sim, detect, sep, out],
                       help="simulate, detect, despike and tabulate GOF per SNR and frequency")
    s.add_argument("--match-tol-ms", type=float, help="event matching tolerance (default 50)")
    s.set_defaults(func=cmd_pipeline)

    s = sub.add_parser("cluster", parents=[common, out], help="k-means on aligned epochs")
    s.add_argument("recording")
    s.add_argument("--events", required=True)
    s.add_argument("--channel", type=int, default=0)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--n-init", type=int, default=10)
    s.add_argument("--epoch-ms", type=float)
    s.add_argument("--zscore", action="store_true", help="z-score epochs before clustering")
    s.add_argument("--sort", choices=["amplitude", "latency"], default="latency")
    s.set_defaults(func=cmd_cluster)

    s = sub.add_parser("topo", parents=[common, out], help="sensor map and dipolarity at one sample")
    s.add_argument("recording")
    s.add_argument("--channel", type=int, required=True, help="anchor channel index")
    s.add_argument("--sample", type=int, required=True, help="anchor sample index")
    s.add_argument("--grid", type=int, default=64)
    s.set_defaults(func=cmd_topo)

    s = sub.add_parser("bench", parents=[common], help="windowed-SVD throughput (JSON to stdout)")
    s.add_argument("--workers", type=int, help="worker processes (default: --jobs)")
    s.add_argument("--channels", type=int, default=151)
    s.add_argument("--window-len", type=int, default=309)
    s.add_argument("--windows", type=int, default=100)
    s.add_argument("--epochs-per-window", type=int, default=32)
    s.set_defaults(func=cmd_bench)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (ValidationError, ValueError, FileNotFoundError, KeyError, OSError) as exc:
        msg = " ".join(str(exc).split()) or type(exc).__name__
        print(f"spikesvd {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
