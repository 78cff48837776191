"""Print the Twin-T design numbers and both transfer-function variants over frequency."""

import argparse

import numpy as np

from ecgkit.filters import TwinTParams, TwinTVariant, twin_t_notch_frequency, twin_t_transfer_function


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--r", type=float, default=32e3, help="resistance, ohm")
    parser.add_argument("--c", type=float, default=100e-9, help="capacitance, farad")
    args = parser.parse_args()

    p = TwinTParams(args.r, args.c)
    f0 = twin_t_notch_frequency(p)
    print(f"f_notch  = {f0:.4f} Hz")
    print(f"1/RC     = {p.omega0:.4f} rad/s")
    print(f"(1/RC)^2 = {p.omega0 ** 2:.6g}")
    print()
    print(f"{'f_hz':>8} " + " ".join(f"{v.value:>12}" for v in TwinTVariant))
    tfs = [twin_t_transfer_function(p, v) for v in TwinTVariant]
    for f in np.array([0.1, 0.5, 0.9, 0.99, 1.0, 1.01, 1.1, 2.0, 10.0]) * f0:
        mags = [tf.magnitude(2 * np.pi * f) for tf in tfs]
        print(f"{f:8.3f} " + " ".join(f"{m:12.6g}" for m in mags))


if __name__ == "__main__":
    main()
