"""Main-lobe width and peak side-lobe level of each window family."""

import argparse

import numpy as np

from ecgkit.spectral import WindowFamily, WindowSpec, fft, make_window, to_db


def lobe_stats(w, nfft):
    mag = np.abs(fft(w, nfft).bins[: nfft // 2 + 1])
    db = to_db(mag, ref=mag[0], floor_db=-300.0)
    rising = np.nonzero(np.diff(mag) > 0)[0]
    first_null = int(rising[0]) if rising.size else nfft // 2
    sidelobe = float(db[first_null:].max()) if first_null < db.size else float("-inf")
    return 2 * first_null * len(w) / nfft, sidelobe


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--length", type=int, default=64)
    parser.add_argument("--nfft", type=int, default=1 << 14)
    args = parser.parse_args()

    specs = [WindowSpec(f, args.length) for f in WindowFamily]
    specs += [WindowSpec(WindowFamily.KAISER, args.length, beta=b) for b in (0.0, 4.0, 12.0)]
    specs += [WindowSpec(WindowFamily.GAUSSIAN, args.length, sigma=s) for s in (0.2, 0.6)]
    print(f"{'window':<26} {'mainlobe_bins':>13} {'sidelobe_db':>11} {'coherent_gain':>13}")
    for spec in specs:
        w = make_window(spec)
        width, side = lobe_stats(w, args.nfft)
        extra = f" beta={spec.beta:g}" if spec.family is WindowFamily.KAISER else ""
        extra += f" sigma={spec.sigma:g}" if spec.family is WindowFamily.GAUSSIAN else ""
        print(f"{spec.family.value + extra:<26} {width:13.2f} {side:11.1f} {w.mean():13.4f}")


if __name__ == "__main__":
    main()
