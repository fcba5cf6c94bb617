#!/usr/bin/env python3
"""Writes the desk scenario inputs: a 10x10 grid, four stations and a
two-peak demand profile. Orders are then drawn with `fleetsim synth`."""

import argparse
import math
from pathlib import Path

SIDE = 10
SPACING_M = 200.0
BIN_S = 450
STATIONS = [(1, 23, 2), (2, 28, 2), (3, 73, 2), (4, 78, 2)]
# Restaurants cluster around two commercial blocks.
HUBS = [(3, 3), (6, 7)]


def node_id(row, col):
    return row * SIDE + col + 1


def network_lines():
    out = ["# 10x10 grid, 200 m blocks, ids row-major from 1"]
    for r in range(SIDE):
        for c in range(SIDE):
            out.append(f"N,{node_id(r, c)},{c * SPACING_M:.1f},{r * SPACING_M:.1f}")
    eid = 1
    for r in range(SIDE):
        for c in range(SIDE):
            if c + 1 < SIDE:
                out.append(f"E,{eid},{node_id(r, c)},{node_id(r, c + 1)},{SPACING_M:.1f},1")
                eid += 1
            if r + 1 < SIDE:
                out.append(f"E,{eid},{node_id(r, c)},{node_id(r + 1, c)},{SPACING_M:.1f},1")
                eid += 1
    return out


def bin_weight(t_h):
    def bump(mu, sigma, height):
        return height * math.exp(-0.5 * ((t_h - mu) / sigma) ** 2)

    return 0.15 + bump(12.5, 1.2, 3.0) + bump(19.0, 1.6, 4.0) + bump(0.5, 1.0, 0.6)


def profile_lines(total):
    out = ["# illustrative two-peak day; not fitted to any data", str(BIN_S), f"total_orders,{total}"]
    for b in range(86400 // BIN_S):
        out.append(f"{bin_weight((b + 0.5) * BIN_S / 3600):.4f}")
    for r in range(SIDE):
        for c in range(SIDE):
            d = min(math.hypot(r - hr, c - hc) for hr, hc in HUBS)
            out.append(f"{node_id(r, c)},{math.exp(-d / 1.5):.4f},1")
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data" / "desk"))
    ap.add_argument("--orders", type=int, default=500)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "network.txt").write_text("\n".join(network_lines()) + "\n")
    stations = ["# id,node,capacity,kind (kind is rewritten from the charging strategy)"]
    stations += [f"S,{i},{n},{cap},Plug" for i, n, cap in STATIONS]
    (out / "stations.txt").write_text("\n".join(stations) + "\n")
    (out / "profile.txt").write_text("\n".join(profile_lines(args.orders)) + "\n")


if __name__ == "__main__":
    main()
