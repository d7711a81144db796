"""State-space export as Graphviz DOT or transition CSV."""

from __future__ import annotations

import csv
import io

from .ctmc import Ctmc


def _state_name(c: Ctmc, i: int) -> str:
    return ",".join(f"{k}={v}" for k, v in c.valuation(i).items())


def to_csv(c: Ctmc) -> str:
    """Rows ``source,target,rate,action``; rates with 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["source", "target", "rate", "action"])
    for t in c.transitions:
        writer.writerow([t.src, t.dst, f"{t.rate:.17g}", t.action or ""])
    return buf.getvalue()


def to_dot(c: Ctmc, name: str = "ctmc") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for i in range(c.num_states):
        shape = "doublecircle" if i == c.initial else "circle"
        lines.append(f'  {i} [shape={shape}, label="{i}\\n{_state_name(c, i)}"];')
    for t in c.transitions:
        label = f"{t.rate:.6g}" if t.action is None else f"[{t.action}] {t.rate:.6g}"
        lines.append(f'  {t.src} -> {t.dst} [label="{label}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
