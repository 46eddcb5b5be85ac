"""SVG path data parsing, flattening, and emission.

Supports the full command set (M/L/H/V/C/S/Q/T/A/Z, absolute and
relative). Curved segments are flattened by uniform parameter sampling,
which is enough for prompt-view simplification and geometry diffing.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

from ..errors import PathParseError
from ..numfmt import format_number

_TOKEN = re.compile(r"[MmLlHhVvCcSsQqTtAaZz]|[-+]?(?:\d*\.\d+|\d+\.?)(?:[eE][-+]?\d+)?")

_ARITY = {
    "M": 2, "L": 2, "H": 1, "V": 1, "C": 6, "S": 4, "Q": 4, "T": 2, "A": 7, "Z": 0,
}


@dataclass
class Command:
    letter: str  # uppercase
    args: list[float]


def tokenize(d: str):
    pos = 0
    for m in _TOKEN.finditer(d):
        between = d[pos : m.start()]
        if between.strip().replace(",", "").strip():
            raise PathParseError(f"unexpected {between!r} in path data")
        pos = m.end()
        yield m.group(0)
    if d[pos:].strip().replace(",", "").strip():
        raise PathParseError(f"unexpected trailing {d[pos:]!r} in path data")


def parse_path(d: str) -> list[Command]:
    """Parse path data into absolute-coordinate commands."""
    tokens = list(tokenize(d))
    if not tokens:
        return []
    cmds: list[Command] = []
    i = 0
    cur = (0.0, 0.0)
    start = (0.0, 0.0)
    letter = None
    while i < len(tokens):
        tok = tokens[i]
        if tok.isalpha():
            letter = tok
            i += 1
        elif letter is None or letter.upper() == "Z":
            raise PathParseError(f"unexpected number {tok!r} without a command")
        upper = letter.upper()
        relative = letter.islower()
        arity = _ARITY[upper]
        if upper == "Z":
            cmds.append(Command("Z", []))
            cur = start
            continue
        if i + arity > len(tokens):
            raise PathParseError(f"truncated arguments for command {letter!r}")
        raw = []
        for j in range(arity):
            t = tokens[i + j]
            if t.isalpha():
                raise PathParseError(f"expected number, got {t!r}")
            raw.append(float(t))
        i += arity
        args, cur, start = _absolutize(upper, relative, raw, cur, start)
        cmds.append(Command(upper, args))
        # An implicit repeat of M becomes L.
        if upper == "M":
            letter = "l" if relative else "L"
    return cmds


def _absolutize(upper, relative, raw, cur, start):
    cx, cy = cur
    if upper == "H":
        x = raw[0] + (cx if relative else 0)
        return [x, cy], (x, cy), start
    if upper == "V":
        y = raw[0] + (cy if relative else 0)
        return [cx, y], (cx, y), start
    if upper == "A":
        rx, ry, rot, laf, swf, x, y = raw
        if relative:
            x += cx
            y += cy
        return [rx, ry, rot, laf, swf, x, y], (x, y), start
    args = list(raw)
    if relative:
        for k in range(0, len(args), 2):
            args[k] += cx
            args[k + 1] += cy
    end = (args[-2], args[-1])
    if upper == "M":
        start = end
    return args, end, start


def _normalize_hv(cmds: list[Command]) -> list[Command]:
    out = []
    for c in cmds:
        if c.letter in ("H", "V"):
            out.append(Command("L", c.args))
        else:
            out.append(c)
    return out


@dataclass
class Subpath:
    points: list[tuple[float, float]]
    closed: bool


def flatten(cmds: list[Command], samples_per_curve: int = 16) -> list[Subpath]:
    """Flatten commands into polyline subpaths."""
    cmds = _normalize_hv(cmds)
    subpaths: list[Subpath] = []
    pts: list[tuple[float, float]] = []
    cur = (0.0, 0.0)
    prev_ctrl = None
    prev_letter = None

    def close_current(closed):
        nonlocal pts
        if pts:
            subpaths.append(Subpath(pts, closed))
        pts = []

    for c in cmds:
        if c.letter == "M":
            close_current(False)
            cur = (c.args[0], c.args[1])
            pts = [cur]
        elif c.letter == "L":
            cur = (c.args[0], c.args[1])
            pts.append(cur)
        elif c.letter == "Z":
            close_current(True)
            if subpaths[-1].points:
                cur = subpaths[-1].points[0]
        elif c.letter in ("C", "S"):
            if c.letter == "C":
                p1 = (c.args[0], c.args[1])
                p2 = (c.args[2], c.args[3])
                end = (c.args[4], c.args[5])
            else:
                p1 = _reflect(cur, prev_ctrl) if prev_letter in ("C", "S") else cur
                p2 = (c.args[0], c.args[1])
                end = (c.args[2], c.args[3])
            for t in _tsteps(samples_per_curve):
                pts.append(_cubic(cur, p1, p2, end, t))
            prev_ctrl = p2
            cur = end
        elif c.letter in ("Q", "T"):
            if c.letter == "Q":
                p1 = (c.args[0], c.args[1])
                end = (c.args[2], c.args[3])
            else:
                p1 = _reflect(cur, prev_ctrl) if prev_letter in ("Q", "T") else cur
                end = (c.args[0], c.args[1])
            for t in _tsteps(samples_per_curve):
                pts.append(_quad(cur, p1, end, t))
            prev_ctrl = p1
            cur = end
        elif c.letter == "A":
            for p in _arc_points(cur, c.args, samples_per_curve):
                pts.append(p)
            cur = (c.args[5], c.args[6])
        prev_letter = c.letter
    close_current(False)
    return subpaths


def _tsteps(n):
    return [i / n for i in range(1, n + 1)]


def _reflect(cur, ctrl):
    if ctrl is None:
        return cur
    return (2 * cur[0] - ctrl[0], 2 * cur[1] - ctrl[1])


def _cubic(p0, p1, p2, p3, t):
    mt = 1 - t
    x = mt**3 * p0[0] + 3 * mt**2 * t * p1[0] + 3 * mt * t**2 * p2[0] + t**3 * p3[0]
    y = mt**3 * p0[1] + 3 * mt**2 * t * p1[1] + 3 * mt * t**2 * p2[1] + t**3 * p3[1]
    return (x, y)


def _quad(p0, p1, p2, t):
    mt = 1 - t
    x = mt**2 * p0[0] + 2 * mt * t * p1[0] + t**2 * p2[0]
    y = mt**2 * p0[1] + 2 * mt * t * p1[1] + t**2 * p2[1]
    return (x, y)


def _arc_points(cur, args, samples):
    """Endpoint-parameterized elliptical arc, sampled uniformly in angle."""
    rx, ry, rot_deg, laf, swf, x2, y2 = args
    x1, y1 = cur
    if rx == 0 or ry == 0 or (x1 == x2 and y1 == y2):
        return [(x2, y2)]
    rx, ry = abs(rx), abs(ry)
    phi = math.radians(rot_deg)
    cosp, sinp = math.cos(phi), math.sin(phi)
    dx2, dy2 = (x1 - x2) / 2, (y1 - y2) / 2
    x1p = cosp * dx2 + sinp * dy2
    y1p = -sinp * dx2 + cosp * dy2
    lam = x1p**2 / rx**2 + y1p**2 / ry**2
    if lam > 1:
        s = math.sqrt(lam)
        rx, ry = rx * s, ry * s
    num = rx**2 * ry**2 - rx**2 * y1p**2 - ry**2 * x1p**2
    den = rx**2 * y1p**2 + ry**2 * x1p**2
    co = math.sqrt(max(0.0, num / den)) if den else 0.0
    if laf == swf:
        co = -co
    cxp = co * rx * y1p / ry
    cyp = -co * ry * x1p / rx
    cx = cosp * cxp - sinp * cyp + (x1 + x2) / 2
    cy = sinp * cxp + cosp * cyp + (y1 + y2) / 2

    def angle(ux, uy, vx, vy):
        dot = ux * vx + uy * vy
        norm = math.hypot(ux, uy) * math.hypot(vx, vy)
        a = math.acos(max(-1.0, min(1.0, dot / norm)))
        if ux * vy - uy * vx < 0:
            a = -a
        return a

    theta1 = angle(1, 0, (x1p - cxp) / rx, (y1p - cyp) / ry)
    dtheta = angle(
        (x1p - cxp) / rx, (y1p - cyp) / ry, (-x1p - cxp) / rx, (-y1p - cyp) / ry
    )
    if swf == 0 and dtheta > 0:
        dtheta -= 2 * math.pi
    elif swf == 1 and dtheta < 0:
        dtheta += 2 * math.pi
    pts = []
    for i in range(1, samples + 1):
        th = theta1 + dtheta * i / samples
        px = cx + rx * math.cos(th) * cosp - ry * math.sin(th) * sinp
        py = cy + rx * math.cos(th) * sinp + ry * math.sin(th) * cosp
        pts.append((px, py))
    pts[-1] = (x2, y2)
    return pts


def emit_polyline_path(subpaths: list[Subpath]) -> str:
    """Serialize polyline subpaths back to M/L/Z path data."""
    parts = []
    for sp in subpaths:
        if not sp.points:
            continue
        x0, y0 = sp.points[0]
        seg = [f"M {format_number(x0)} {format_number(y0)}"]
        for x, y in sp.points[1:]:
            seg.append(f"L {format_number(x)} {format_number(y)}")
        if sp.closed:
            seg.append("Z")
        parts.append(" ".join(seg))
    return " ".join(parts)


def path_numbers(d: str) -> list[float]:
    """All numeric tokens of a path string, in order."""
    return [float(t) for t in _TOKEN.findall(d) if not t.isalpha()]
