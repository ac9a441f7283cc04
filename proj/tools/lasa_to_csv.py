#!/usr/bin/env python3
"""Convert a LASA handwriting .mat file into the demonstration CSV format.

Usage: lasa_to_csv.py Angle.mat out.csv [--every N]

Positions are converted from millimetres to metres; velocities are left
out so that roamkit estimates them the same way for every data source.
"""
import argparse
import csv

import scipy.io


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("mat")
    parser.add_argument("out")
    parser.add_argument("--every", type=int, default=1, help="keep every N-th sample")
    args = parser.parse_args()

    data = scipy.io.loadmat(args.mat, squeeze_me=True, struct_as_record=False)
    demos = data["demos"]
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["demo_id", "t", "x", "y"])
        for demo_id, demo in enumerate(demos):
            pos = demo.pos[:, :: args.every] / 1000.0
            t = demo.t[:: args.every]
            for i in range(pos.shape[1]):
                writer.writerow([demo_id, repr(float(t[i])), repr(float(pos[0, i])), repr(float(pos[1, i]))])


if __name__ == "__main__":
    main()
