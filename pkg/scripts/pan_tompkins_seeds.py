"""Detection accuracy of Pan-Tompkins over seeded synthetic records."""

import argparse
import time

import numpy as np

from ecgkit.detect import detect_r_peaks
from ecgkit.synthetic import beat_times, synthetic_ecg


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=100)
    parser.add_argument("--duration", type=float, default=60.0)
    parser.add_argument("--fs", type=float, default=360.0)
    parser.add_argument("--bpm", type=float, nargs="+", default=[50.0, 75.0, 120.0])
    parser.add_argument("--snr-db", type=float, nargs="+", default=[10.0, 20.0, 30.0])
    args = parser.parse_args()

    print(f"{'bpm':>6} {'snr_db':>7} {'exact':>6} {'within1':>8} {'hbr_mae':>8} {'tol2_recall':>11} {'sec':>6}")
    for bpm in args.bpm:
        truth = np.rint(beat_times(args.duration, bpm) * args.fs).astype(int)
        for snr in args.snr_db:
            t0 = time.perf_counter()
            exact = within = 0
            errs, hits = [], 0
            for seed in range(args.seeds):
                beats = detect_r_peaks(synthetic_ecg(args.duration, args.fs, bpm, snr_db=snr, seed=seed))
                exact += len(beats) == truth.size
                within += abs(len(beats) - truth.size) <= 1
                if len(beats) > 1:
                    errs.append(abs(60.0 / beats.rr_intervals_s.mean() - bpm))
                d = np.abs(truth[:, None] - beats.r_indices[None, :]).min(axis=1) if len(beats) else truth
                hits += int(np.sum(d <= 2))
            sec = time.perf_counter() - t0
            recall = hits / (truth.size * args.seeds)
            mae = float(np.mean(errs)) if errs else float("nan")
            print(f"{bpm:6g} {snr:7g} {exact:6d} {within:8d} {mae:8.3f} {recall:11.4f} {sec:6.2f}")


if __name__ == "__main__":
    main()
