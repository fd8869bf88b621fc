"""Write a simulation trace as one file per display update.

Each frame shows the cumulative state of its iteration: the ideal sequential
fine curve (blue), the current coarse guesses (green), the previous ones
(red), fine progress so far (black) and, once connected, the new iterate
(orange). Output is a pure function of the trace.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from ..core import ValidationError
from .simulation import CoarseGuess, FineChunk, IterationConnected, event_batches

__all__ = ["emit_frames", "frame_series", "fmt_float", "INDEX_NAME"]

INDEX_NAME = "frames.json"
WIDTH, HEIGHT, MARGIN = 800, 600, 50
IDEAL_COLOR = "blue"


def fmt_float(x) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(x))


def frame_series(ideal, state) -> list:
    """``[(series, color, times, values(n, d))]`` for one frame, in draw order."""
    out = [("ideal", IDEAL_COLOR, ideal.times, ideal.values)]
    for color, label in (("red", "coarse_previous"), ("green", "coarse_current")):
        pts = state["guesses"].get(color)
        if pts:
            out.append((label, color, np.array([p.t for p in pts]),
                        np.array([p.value for p in pts])))
    for n in sorted(state["fine"]):
        chunks = state["fine"][n]
        out.append((f"fine_{n}", "black", np.concatenate([c.times for c in chunks]),
                    np.concatenate([c.values for c in chunks])))
    if state["connected"] is not None:
        ev = state["connected"]
        out.append(("connected", ev.color, ev.times, ev.values))
    return out


def _frames(trace):
    """Yield ``(k, seq, series)`` per batch."""
    state = None
    k_cur, seq = None, 0
    for batch in event_batches(trace):
        k = batch[0].k
        if k != k_cur:
            state = {"guesses": {}, "fine": {}, "connected": None}
            k_cur, seq = k, 0
        for ev in batch:
            if isinstance(ev, CoarseGuess):
                state["guesses"].setdefault(ev.color, []).append(ev)
            elif isinstance(ev, FineChunk):
                state["fine"].setdefault(ev.n, []).append(ev)
            elif isinstance(ev, IterationConnected):
                state["connected"] = ev
        yield k, seq, frame_series(trace.ideal, state)
        seq += 1


def _csv_frame(series) -> str:
    lines = ["series,t,y,color"]
    for name, color, times, values in series:
        d = values.shape[1]
        for j in range(d):
            label = name if d == 1 else f"{name}[{j}]"
            lines.extend(f"{label},{fmt_float(t)},{fmt_float(v)},{color}"
                         for t, v in zip(times.tolist(), values[:, j].tolist()))
    return "\n".join(lines) + "\n"


class _Canvas:
    def __init__(self, trace):
        ts = [trace.ideal.times]
        vs = [trace.ideal.values.reshape(-1)]
        for ev in trace.events:
            if isinstance(ev, CoarseGuess):
                ts.append(np.array([ev.t]))
                vs.append(ev.value.reshape(-1))
            else:
                ts.append(ev.times)
                vs.append(ev.values.reshape(-1))
        t = np.concatenate(ts)
        v = np.concatenate(vs)
        self.t0, self.t1 = float(t.min()), float(t.max())
        self.v0, self.v1 = float(v.min()), float(v.max())
        if self.t1 == self.t0:
            self.t1 = self.t0 + 1.0
        if self.v1 == self.v0:
            self.v0, self.v1 = self.v0 - 1.0, self.v1 + 1.0

    def xy(self, t, v):
        x = MARGIN + (np.asarray(t) - self.t0) / (self.t1 - self.t0) * (WIDTH - 2 * MARGIN)
        y = HEIGHT - MARGIN - (np.asarray(v) - self.v0) / (self.v1 - self.v0) * (HEIGHT - 2 * MARGIN)
        return x, y


def _polyline(canvas, times, values, color, ident):
    x, y = canvas.xy(times, values)
    pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(x.tolist(), y.tolist()))
    return (f'<polyline class="{ident}" fill="none" stroke="{color}" '
            f'stroke-width="1.5" points="{pts}"/>')


def _svg_frame(canvas, k, seq, series) -> str:
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
        f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" '
        f'y2="{HEIGHT - MARGIN}" stroke="gray"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="gray"/>',
        f'<text x="{MARGIN}" y="30" font-family="sans-serif" font-size="14">'
        f'iteration {k}, frame {seq}</text>',
        f'<text x="{MARGIN}" y="{HEIGHT - 20}" font-family="sans-serif" font-size="11">'
        f't: [{fmt_float(canvas.t0)}, {fmt_float(canvas.t1)}]  '
        f'y: [{fmt_float(canvas.v0)}, {fmt_float(canvas.v1)}]</text>',
    ]
    for name, color, times, values in series:
        for j in range(values.shape[1]):
            if name.startswith("coarse_"):
                x, y = canvas.xy(times, values[:, j])
                parts.extend(f'<circle class="{name}" cx="{a:.2f}" cy="{b:.2f}" r="4" '
                             f'fill="{color}"/>' for a, b in zip(x.tolist(), y.tolist()))
            else:
                parts.append(_polyline(canvas, times, values[:, j], color, name))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def emit_frames(trace, out_dir, format: str = "csv") -> list:
    """Write ``frame_<k>_<seq>.<format>`` files plus the ``frames.json`` index.

    The index is written last and atomically, so a failed run never leaves
    an index pointing at missing frames. Returns the frame paths in order.
    """
    if format not in ("csv", "svg"):
        raise ValidationError("format", f"must be 'csv' or 'svg', got {format!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index_path = out / INDEX_NAME
    if index_path.exists():
        index_path.unlink()
    for stale in list(out.glob("frame_*.csv")) + list(out.glob("frame_*.svg")):
        stale.unlink()
    canvas = _Canvas(trace) if (format == "svg" and trace.events) else None
    paths = []
    for k, seq, series in _frames(trace):
        path = out / f"frame_{k:03d}_{seq:05d}.{format}"
        text = _csv_frame(series) if format == "csv" else _svg_frame(canvas, k, seq, series)
        _write_text(path, text)
        paths.append(path)
    index = {"format": format, "seed": trace.seed, "n_coarse": trace.n_coarse,
             "n_fine": trace.n_fine, "iterations": trace.iterations,
             "frames": [p.name for p in paths]}
    fd, tmp = tempfile.mkstemp(dir=out, prefix=".frames-", suffix=".json.tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(index, fh, indent=1)
            fh.write("\n")
        os.replace(tmp, index_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return paths
