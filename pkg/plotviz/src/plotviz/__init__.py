"""Log-scale BER figure rendering for link-simulator sweep CSVs.

Consumes the exact sweep CSV wire format
(`scheme,variant,n_t,n_r,mod,L,theta,snr_db,bits,errors,ber,seed`), groups
rows into one series per distinct (scheme, variant, L) tuple — dropping L
from the key when L itself is the x axis — and renders a semilog-y figure
with one marker style per series.  Rendering is pure: the same CSV yields
a byte-identical image under a fixed style version.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# bump whenever anything about the rendered output changes
STYLE_VERSION = "1"

EXPECTED_HEADER = "scheme,variant,n_t,n_r,mod,L,theta,snr_db,bits,errors,ber,seed"

# fixed style table, cycled in series order
_STYLES = [
    ("#1f77b4", "o", "-"), ("#d62728", "s", "-"), ("#2ca02c", "^", "-"),
    ("#9467bd", "d", "-"), ("#ff7f0e", "v", "-"), ("#8c564b", "p", "-"),
    ("#17becf", "x", "--"), ("#e377c2", "*", "--"), ("#7f7f7f", "+", "--"),
    ("#bcbd22", "h", "--"),
]

_AXES = {"snr_db": "SNR (dB)", "L": "array elements L"}


class PlotError(ValueError):
    """Malformed input CSV; the message names the offending line."""


def read_rows(csv_path: str) -> list[dict]:
    """Parse a sweep CSV, validating the header and every row."""
    with open(csv_path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != EXPECTED_HEADER:
        raise PlotError(f"{csv_path}:1: header must be {EXPECTED_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 12:
            raise PlotError(f"{csv_path}:{lineno}: expected 12 fields, got {len(parts)}")
        try:
            # validate the full row, not just the plotted columns
            for idx in (2, 3, 5, 8, 9, 11):
                int(parts[idx])
            if parts[6]:
                float(parts[6])
            rows.append({
                "scheme": parts[0], "variant": parts[1], "L": int(parts[5]),
                "snr_db": float(parts[7]), "ber": float(parts[10]),
            })
        except ValueError as exc:
            raise PlotError(f"{csv_path}:{lineno}: {exc}")
    if not rows:
        raise PlotError(f"{csv_path}: no data rows")
    return rows


def group_series(rows: list[dict], x_axis: str) -> dict[tuple, list[tuple]]:
    """One (x, ber) point list per key tuple, sorted for determinism."""
    if x_axis not in _AXES:
        raise PlotError(f"x axis must be one of {sorted(_AXES)}, got {x_axis!r}")
    series: dict[tuple, list[tuple]] = {}
    for row in rows:
        if x_axis == "L":
            key = (row["scheme"], row["variant"])
        else:
            key = (row["scheme"], row["variant"], row["L"])
        series.setdefault(key, []).append((row[x_axis], row["ber"]))
    return {key: sorted(pts) for key, pts in sorted(series.items())}


def render(csv_path: str, x_axis: str, out_image_path: str) -> int:
    """Render the CSV to an image file; returns the number of series drawn.

    Zero-BER points fall below the log axis and are skipped.
    """
    series = group_series(read_rows(csv_path), x_axis)
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    for idx, (key, pts) in enumerate(series.items()):
        color, marker, linestyle = _STYLES[idx % len(_STYLES)]
        xs = [x for x, ber in pts if ber > 0.0]
        ys = [ber for _, ber in pts if ber > 0.0]
        label = " ".join(str(k) for k in key)
        ax.semilogy(xs, ys, color=color, marker=marker, linestyle=linestyle,
                    markersize=5, linewidth=1.2, label=label)
    ax.set_xlabel(_AXES[x_axis])
    ax.set_ylabel("BER")
    ax.set_ylim(1e-6, 1.0)
    ax.grid(True, which="both", alpha=0.4)
    ax.legend(fontsize=7, loc="lower left")
    fig.tight_layout()
    fig.savefig(out_image_path, dpi=120,
                metadata={"Software": f"plotviz style {STYLE_VERSION}"})
    plt.close(fig)
    return len(series)
