#!/usr/bin/env python3
"""Writes configs/hall.toml and configs/hall_abrupt.toml.

The hall is an 80 m x 60 m room with 4 m walls, a field of crates and short posts kept
clear of the elliptical test circuit.
"""
import math
import pathlib
import random

HALF_X, HALF_Y, WALL_H = 40.0, 30.0, 4.0
FLOOR_Z = 0.0
SEMI = (25.0, 15.0)
CLEARANCE = 2.5
BOXES = 150
POSTS = 600
SEED = 11


def ellipse_distance(x, y):
    best = float("inf")
    for k in range(720):
        t = 2 * math.pi * k / 720
        ex, ey = SEMI[0] * math.cos(t), SEMI[1] * math.sin(t)
        best = min(best, math.hypot(x - ex, y - ey))
    return best


def fmt(v):
    return "[" + ", ".join(f"{c:.3f}" for c in v) + "]"


def scene_lines():
    lines = ["# generated by tools/make_hall.py", ""]

    def rect(origin, u, v):
        lines.extend(["[[rectangle]]", f"origin = {fmt(origin)}",
                      f"u = {fmt(u)}", f"v = {fmt(v)}", ""])

    rect((-HALF_X, -HALF_Y, FLOOR_Z), (2 * HALF_X, 0, 0), (0, 2 * HALF_Y, 0))
    rect((-HALF_X, -HALF_Y, FLOOR_Z), (2 * HALF_X, 0, 0), (0, 0, WALL_H))
    rect((-HALF_X, HALF_Y, FLOOR_Z), (2 * HALF_X, 0, 0), (0, 0, WALL_H))
    rect((-HALF_X, -HALF_Y, FLOOR_Z), (0, 2 * HALF_Y, 0), (0, 0, WALL_H))
    rect((HALF_X, -HALF_Y, FLOOR_Z), (0, 2 * HALF_Y, 0), (0, 0, WALL_H))

    rng = random.Random(SEED)
    placed = []

    def place(count, spacing, size, height):
        done = tries = 0
        while done < count:
            tries += 1
            if tries > 200000:
                raise SystemExit(f"could not place {count} objects")
            x = rng.uniform(-HALF_X + 1.5, HALF_X - 1.5)
            y = rng.uniform(-HALF_Y + 1.5, HALF_Y - 1.5)
            if ellipse_distance(x, y) < CLEARANCE:
                continue
            if any(math.hypot(x - px, y - py) < max(spacing, ps)
                   for px, py, ps in placed):
                continue
            placed.append((x, y, spacing))
            done += 1
            w, d, h = rng.uniform(*size), rng.uniform(*size), height()
            yaw = rng.uniform(0.0, 90.0)
            lines.extend(["[[box]]", f"min = {fmt((x - w / 2, y - d / 2, FLOOR_Z))}",
                          f"max = {fmt((x + w / 2, y + d / 2, FLOOR_Z + h))}",
                          f"yaw_deg = {yaw:.2f}", ""])

    # crates: mostly below the sensor so the raster sees their top face
    place(BOXES, 3.0, (1.0, 2.5),
          lambda: rng.uniform(2.5, 5.0) if rng.random() < 0.1 else rng.uniform(0.6, 1.5))
    # posts: one raster cell each, little occlusion
    place(POSTS, 1.2, (0.25, 0.35), lambda: rng.uniform(0.4, 1.5))
    return lines


def main():
    out = pathlib.Path(__file__).resolve().parent.parent / "configs"
    body = scene_lines()
    tail = ["[lidar]", "channels = 64", "horizontal_steps = 720",
            "elevation_max = 3.0", "elevation_min = -25.0", "max_range = 120.0", ""]
    traj = ["[trajectory]", "center = [0.0, 0.0]",
            f"semi_axes = [{SEMI[0]}, {SEMI[1]}]", "frames = 200", "sensor_height = 1.7"]
    (out / "hall.toml").write_text("\n".join(body + tail + traj) + "\n")
    # same path at a slower pace, with five heading jumps
    jumps = [l.replace("frames = 200", "frames = 300") for l in traj]
    jumps += ["yaw_jump_frames = [45, 105, 165, 225, 277]", "yaw_jump_deg = 20.0"]
    (out / "hall_abrupt.toml").write_text("\n".join(body + tail + jumps) + "\n")


if __name__ == "__main__":
    main()
