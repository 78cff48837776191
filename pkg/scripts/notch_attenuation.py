"""Steady-state attenuation of the digital notch across Q and tone frequency."""

import argparse

import numpy as np

from ecgkit.filters import NotchDesign, apply, design_notch
from ecgkit.synthetic import sine


def steady_gain_db(cascade, freq, fs, seconds=10.0):
    x = sine(freq, seconds, fs)
    y = apply(cascade, x).samples
    tail = slice(len(y) // 2, len(y))
    return 20 * np.log10(np.sqrt(np.mean(y[tail] ** 2)) / np.sqrt(np.mean(x.samples[tail] ** 2)))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--fs", type=float, default=360.0)
    parser.add_argument("--notch-hz", type=float, default=50.0)
    parser.add_argument("--q", type=float, nargs="+", default=[5.0, 10.0, 30.0, 100.0])
    args = parser.parse_args()

    tones = [10.0, 40.0, 45.0, 49.0, args.notch_hz, 51.0, 55.0, 60.0]
    print("gain in dB, last half of a 10 s tone")
    print(f"{'Q':>6} " + " ".join(f"{f:>9g}" for f in tones))
    for q in args.q:
        cascade = design_notch(NotchDesign(args.notch_hz, q, args.fs))
        gains = [steady_gain_db(cascade, f, args.fs) for f in tones]
        print(f"{q:6g} " + " ".join(f"{g:9.3f}" for g in gains))


if __name__ == "__main__":
    main()
