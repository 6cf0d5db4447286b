"""Gantt chart rendering as standalone SVG text.

One row per machine.  Batches appear as rectangles spanning their processing
window, filled with a per-configuration color so batches sharing a
configuration match; setup segments are grey and reconfiguration segments
black.  The x axis is in schedule time units.  Output is deterministic for
golden-file comparisons.
"""

from __future__ import annotations

from .model import Instance, TimedSchedule, validate_schedule

PALETTE = (
    "#4e79a7",
    "#f28e2b",
    "#59a14f",
    "#e15759",
    "#b07aa1",
    "#76b7b2",
    "#edc948",
    "#ff9da7",
    "#9c755f",
    "#bab0ac",
)

_MARGIN_LEFT = 70
_MARGIN_TOP = 30
_MARGIN_RIGHT = 30
_MARGIN_BOTTOM = 45
_ROW_HEIGHT = 34
_BAR_HEIGHT = 22
_PLOT_WIDTH = 900


def config_color(config_id: int) -> str:
    return PALETTE[(config_id - 1) % len(PALETTE)]


def gantt_svg(instance: Instance, timed: TimedSchedule) -> str:
    """Render the timed schedule; refuses schedules that fail validation."""
    violations = validate_schedule(instance, timed.schedule)
    if violations:
        raise ValueError(f"invalid schedule: {violations[0]}")

    machines = sorted(instance.machines, key=lambda m: m.id)
    height = _MARGIN_TOP + _ROW_HEIGHT * len(machines) + _MARGIN_BOTTOM
    width = _MARGIN_LEFT + _PLOT_WIDTH + _MARGIN_RIGHT
    span = max(timed.makespan, 1)
    scale = _PLOT_WIDTH / span

    def x(t: float) -> float:
        return _MARGIN_LEFT + t * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"'
        f' viewBox="0 0 {width} {height}">',
        '<style>text{font-family:sans-serif;font-size:11px;}</style>',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]

    def rect(cls: str, t0: int, t1: int, y: float, fill: str, title: str) -> None:
        if t1 <= t0:
            return
        parts.append(
            f'<rect class="{cls}" x="{x(t0):.2f}" y="{y:.2f}"'
            f' width="{(t1 - t0) * scale:.2f}" height="{_BAR_HEIGHT}"'
            f' fill="{fill}" stroke="#333" stroke-width="0.5">'
            f"<title>{title}</title></rect>"
        )

    for row, machine in enumerate(machines):
        y = _MARGIN_TOP + row * _ROW_HEIGHT + (_ROW_HEIGHT - _BAR_HEIGHT) / 2
        label_y = _MARGIN_TOP + row * _ROW_HEIGHT + _ROW_HEIGHT / 2 + 4
        parts.append(f'<text x="8" y="{label_y:.2f}">machine {machine.id}</text>')
        seq = timed.schedule.config_sequence.get(machine.id, ())
        if not seq:
            continue
        by_batch: dict[int, list[int]] = {}
        batch_cfg: dict[int, int] = {}
        for oid, (mid, cid, b) in timed.schedule.assignment.items():
            if mid == machine.id:
                by_batch.setdefault(b, []).append(oid)
                batch_cfg[b] = cid
        clock = 0
        prev = 0
        for cid in seq:
            cfg = machine.config(cid)
            t_rc = machine.reconfig[(prev, cid)]
            rect(
                "reconfig", clock, clock + t_rc, y, "#000000",
                f"reconfigure {prev}->{cid}",
            )
            clock += t_rc
            for b in sorted(bb for bb, cc in batch_cfg.items() if cc == cid):
                members = sorted(by_batch[b])
                rect(
                    "setup", clock, clock + cfg.setup_time, y, "#9e9e9e",
                    f"setup batch {b}",
                )
                clock += cfg.setup_time
                proc = sum(cfg.eligible[o] for o in members)
                rect(
                    "proc", clock, clock + proc, y, config_color(cid),
                    f"batch {b} config {cid} orders {members}",
                )
                clock += proc
            prev = cid

    axis_y = _MARGIN_TOP + _ROW_HEIGHT * len(machines) + 8
    parts.append(
        f'<line x1="{x(0):.2f}" y1="{axis_y}" x2="{x(span):.2f}" y2="{axis_y}"'
        f' stroke="#333" stroke-width="1"/>'
    )
    for i in range(5):
        t = span * i // 4
        parts.append(
            f'<line x1="{x(t):.2f}" y1="{axis_y}" x2="{x(t):.2f}" y2="{axis_y + 4}"'
            f' stroke="#333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{x(t):.2f}" y="{axis_y + 16}" text-anchor="middle">{t}</text>'
        )
    parts.append(
        f'<text x="{x(span / 2):.2f}" y="{axis_y + 32}" text-anchor="middle">'
        f"time (makespan {timed.makespan})</text>"
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
