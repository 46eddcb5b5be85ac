"""Ramer-Douglas-Peucker polyline reduction."""

from __future__ import annotations

import math


def perpendicular_distance(p, a, b) -> float:
    """Distance from p to the segment a-b."""
    ax, ay = a
    bx, by = b
    px, py = p
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0:  # also guards against underflow on subnormal segments
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / denom
    t = max(0.0, min(1.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def rdp(points: list[tuple[float, float]], epsilon: float) -> list[tuple[float, float]]:
    """Reduce a polyline, keeping endpoints; max deviation stays <= epsilon."""
    if len(points) < 3:
        return list(points)
    keep = [False] * len(points)
    keep[0] = keep[-1] = True
    stack = [(0, len(points) - 1)]
    while stack:
        first, last = stack.pop()
        max_d = 0.0
        index = first
        for i in range(first + 1, last):
            d = perpendicular_distance(points[i], points[first], points[last])
            if d > max_d:
                max_d = d
                index = i
        if max_d > epsilon:
            keep[index] = True
            stack.append((first, index))
            stack.append((index, last))
    return [p for p, k in zip(points, keep) if k]


def rdp_closed(points: list[tuple[float, float]], epsilon: float) -> list[tuple[float, float]]:
    """RDP for a closed ring (first point == anchor, last point distinct)."""
    if len(points) < 4:
        return list(points)
    # Anchor at the two most distant vertices so the ring cannot collapse.
    n = len(points)
    best = (0, n // 2)
    best_d = -1.0
    for i in range(n):
        j = (i + n // 2) % n
        d = math.hypot(points[i][0] - points[j][0], points[i][1] - points[j][1])
        if d > best_d:
            best_d = d
            best = tuple(sorted((i, j)))
    i, j = best
    part1 = rdp(points[i : j + 1], epsilon)
    part2 = rdp(points[j:] + points[: i + 1], epsilon)
    return part1[:-1] + part2[:-1]
