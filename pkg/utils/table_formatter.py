# utils/table_formatter.py
"""
Render audit, comparison and sweep summaries as tables.

Rich tables by default; `plain=True` gives fixed-width text with the same
columns for logs, pipes and tests.
"""

from typing import Any, Dict, List, Sequence, Tuple

from rich.console import Console
from rich.table import Table

from coordinator.state_schema import GradReport, ProfileWitness, ScedParams


def plain_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """Left-aligned columns separated by two spaces, with a dashed rule under the header"""
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(cell)) for w, cell in zip(widths, row)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows)
    return "\n".join(lines)


def rich_table(title: str, headers: Sequence[str], rows: Sequence[Sequence[str]]) -> Table:
    table = Table(title=title, header_style="bold")
    for i, h in enumerate(headers):
        table.add_column(h, justify="left" if i == 0 else "right")
    for row in rows:
        table.add_row(*row)
    return table


def render(console: Console, title: str, headers: Sequence[str], rows: Sequence[Sequence[str]],
           plain: bool = False) -> None:
    if plain:
        console.print(title, markup=False, highlight=False)
        console.print(plain_table(headers, rows), markup=False, highlight=False)
    else:
        console.print(rich_table(title, headers, rows))


# === Row builders ===

SUMMARY_HEADERS = ["alpha", "beta", "lambda_sced", "lambda_kl", "seeds",
                   "accuracy", "effective support"]


def summary_rows(summary: List[Dict[str, Any]]) -> List[List[str]]:
    return [
        [
            f"{cell['alpha']:g}", f"{cell['beta']:g}", f"{cell['lambda_sced']:g}", f"{cell['lambda_kl']:g}",
            str(cell["n_seeds"]),
            f"{cell['accuracy_mean']:.4f} ± {cell['accuracy_std']:.4f}",
            f"{cell['effective_support_mean']:.4f} ± {cell['effective_support_std']:.4f}",
        ]
        for cell in summary
    ]


AUDIT_HEADERS = ["alpha", "beta", "regime", "max rel error", "worst (step, token)", "excluded"]


def audit_rows(reports: List[Tuple[ScedParams, GradReport, str]]) -> List[List[str]]:
    return [
        [f"{p.alpha:g}", f"{p.beta:g}", regime, f"{r.max_rel_error:.3e}",
         f"({r.worst_coordinate[0]}, {r.worst_coordinate[1]})", str(r.n_excluded)]
        for p, r, regime in reports
    ]


PROFILE_FLAGS = ["differentiable", "sparse", "adaptive", "architecture_free"]
PROFILE_HEADERS = ["method", *PROFILE_FLAGS, "witnesses"]


def profile_rows(witnesses: List[ProfileWitness]) -> List[List[str]]:
    rows = []
    for w in witnesses:
        claimed = w.profile.model_dump()
        marks = ["yes" if claimed[flag] else "no" for flag in PROFILE_FLAGS]
        rows.append([w.profile.name, *marks, "agree" if w.agrees else "DISAGREE"])
    return rows
