"""Render simulator sweep CSVs to figures.

Strictly read-only over the CSV: one error-bar curve per parameter group,
dashed horizontal lines at the bound columns, nothing recomputed. Group
ordering is sorted, so output is deterministic for a given input.
"""

from __future__ import annotations

import csv
import enum
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


class SchemaError(ValueError):
    """The input CSV does not carry the columns of the requested sweep kind."""


class FigureKind(enum.Enum):
    SNR = "snr"
    REFLECTOR = "reflector"
    EE = "ee"


# kind -> (group columns, x column, value column, x label, y label)
_LAYOUT = {
    FigureKind.SNR: (("M", "N"), "snr_db", "se_mean",
                     "SNR (dB)", "Spectral efficiency (bits/s/Hz)"),
    FigureKind.REFLECTOR: (("M", "snr_db"), "N", "se_mean",
                           "Reflecting elements N", "Spectral efficiency (bits/s/Hz)"),
    FigureKind.EE: (("rho_split",), "M", "ee",
                    "BS antennas M", "Energy efficiency (bit/Joule)"),
}


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    figure_kind: FigureKind
    output_path: str
    group_keys: tuple = None  # defaults to the kind's grouping columns

    def layout(self):
        groups, x_col, value_col, x_label, y_label = _LAYOUT[self.figure_kind]
        if self.group_keys is not None:
            groups = tuple(self.group_keys)
        return groups, x_col, value_col, x_label, y_label


def load_rows(spec: FigureSpec):
    """Parse the CSV and check it against the sweep-kind schema."""
    groups, x_col, value_col, _, _ = spec.layout()
    required = groups + (x_col, value_col, "std_err", "bound_lower", "bound_upper")
    try:
        with open(spec.input_csv, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or ()
            for column in required:
                if column not in header:
                    raise SchemaError(
                        f"{spec.input_csv}: missing column '{column}' required "
                        f"for kind '{spec.figure_kind.value}'"
                    )
            rows = [{k: float(v) for k, v in row.items()} for row in reader]
    except OSError as exc:
        raise SchemaError(f"cannot read {spec.input_csv}: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{spec.input_csv}: non-numeric cell ({exc})") from exc
    return rows


def _group_label(names, key):
    def fmt(v):
        return str(int(v)) if float(v).is_integer() else f"{v:g}"
    return ", ".join(f"{n}={fmt(v)}" for n, v in zip(names, key))


def build_figure(spec: FigureSpec):
    """Figure with one curve per sorted group; returned for inspection."""
    groups, x_col, value_col, x_label, y_label = spec.layout()
    rows = load_rows(spec)

    grouped = {}
    for row in rows:
        grouped.setdefault(tuple(row[g] for g in groups), []).append(row)

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for key in sorted(grouped):
        pts = sorted(grouped[key], key=lambda r: r[x_col])
        xs = [r[x_col] for r in pts]
        container = ax.errorbar(xs, [r[value_col] for r in pts],
                                yerr=[r["std_err"] for r in pts],
                                marker="o", markersize=3, capsize=2,
                                label=_group_label(groups, key))
        color = container.lines[0].get_color()
        for bound in (pts[-1]["bound_upper"], pts[-1]["bound_lower"]):
            if math.isfinite(bound):  # ideal-hardware sweeps carry inf bounds
                ax.axhline(bound, linestyle="--", linewidth=0.9,
                           color=color, alpha=0.6)
    ax.set_xlabel(x_label)
    ax.set_ylabel(y_label)
    ax.grid(True, alpha=0.3)
    if grouped:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return fig


def render_figure(spec: FigureSpec) -> None:
    """Write the figure to spec.output_path (vector PDF if no suffix given)."""
    out = Path(spec.output_path)
    if not out.suffix:
        out = out.with_suffix(".pdf")
    fig = build_figure(spec)
    try:
        fig.savefig(out)
    finally:
        plt.close(fig)


def build_parser():
    import argparse

    parser = argparse.ArgumentParser(
        prog="irs-fig", description="Render simulator sweep CSVs to figures")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("render", help="render one CSV to one image")
    p.add_argument("--kind", required=True, choices=[k.value for k in FigureKind],
                   help="sweep kind the CSV came from")
    p.add_argument("--in", dest="input_csv", required=True, help="input CSV path")
    p.add_argument("--out", dest="output_path", required=True, help="output image path")
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    spec = FigureSpec(input_csv=args.input_csv,
                      figure_kind=FigureKind(args.kind),
                      output_path=args.output_path)
    try:
        render_figure(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(cli_main())
