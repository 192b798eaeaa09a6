#!/usr/bin/env python3
"""Write a constant-speed great-circle flight trace as `epoch_seconds,lat_deg,lon_deg,alt_m` rows."""

import argparse
import math

EARTH_RADIUS_KM = 6371.0


def to_vec(lat, lon):
    la, lo = math.radians(lat), math.radians(lon)
    return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))


def to_latlon(v):
    x, y, z = v
    return math.degrees(math.atan2(z, math.hypot(x, y))), math.degrees(math.atan2(y, x))


def slerp(a, b, f):
    dot = max(-1.0, min(1.0, sum(p * q for p, q in zip(a, b))))
    omega = math.acos(dot)
    if omega < 1e-12:
        return a
    s = math.sin(omega)
    wa, wb = math.sin((1 - f) * omega) / s, math.sin(f * omega) / s
    return tuple(wa * p + wb * q for p, q in zip(a, b))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--from", dest="src", type=float, nargs=2, metavar=("LAT", "LON"), required=True)
    ap.add_argument("--to", dest="dst", type=float, nargs=2, metavar=("LAT", "LON"), required=True)
    ap.add_argument("--speed-kmh", type=float, default=900.0)
    ap.add_argument("--altitude-m", type=float, default=10668.0)
    ap.add_argument("--step-s", type=float, default=60.0)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    a, b = to_vec(*args.src), to_vec(*args.dst)
    dist_km = EARTH_RADIUS_KM * math.acos(max(-1.0, min(1.0, sum(p * q for p, q in zip(a, b)))))
    duration_s = dist_km / args.speed_kmh * 3600.0
    steps = math.ceil(duration_s / args.step_s)
    with open(args.out, "w") as f:
        f.write("epoch_seconds,lat_deg,lon_deg,alt_m\n")
        for i in range(steps + 1):
            t = min(i * args.step_s, duration_s)
            lat, lon = to_latlon(slerp(a, b, t / duration_s))
            f.write(f"{t:.1f},{lat:.6f},{lon:.6f},{args.altitude_m:.1f}\n")
    print(f"{args.out}: {dist_km:.1f} km, {duration_s:.1f} s, {steps + 1} rows")


if __name__ == "__main__":
    main()
