"""CSV export of trace records."""

import csv
import math

SCALAR_COLUMNS = ("theta", "theta_hat", "theta_err", "omega_hat", "k_hat", "a1_hat", "a2_hat",
                  "Delta", "P", "w", "w_c")
FLAG_COLUMNS = ("v_floor_active", "tc_reached")


def header(n):
    cols = ["t"]
    cols += [f"x{i + 1}" for i in range(n)]
    cols += [f"y{i + 1}" for i in range(n)]
    cols += [f"xhat{i + 1}" for i in range(n)]
    return cols + list(SCALAR_COLUMNS) + list(FLAG_COLUMNS)


def _fmt(v):
    v = float(v)
    if math.isnan(v):
        return "nan"
    return f"{v:.12g}"


def row(r):
    vals = [r.t, *r.x, *r.y, *r.x_hat]
    vals += [getattr(r, c) for c in SCALAR_COLUMNS]
    return [_fmt(v) for v in vals] + [str(int(bool(getattr(r, c)))) for c in FLAG_COLUMNS]


def write_csv(records, destination, n=None):
    """Write records with the fixed header; ``destination`` is a path or text stream.

    ``n`` (state dimension) is only needed when ``records`` is empty.
    """
    records = list(records)
    if n is None:
        n = len(records[0].x) if records else 2
    if hasattr(destination, "write"):
        _write(records, destination, n)
    else:
        with open(destination, "w", newline="", encoding="utf-8") as fh:
            _write(records, fh, n)


def _write(records, fh, n):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header(n))
    for r in records:
        w.writerow(row(r))


def read_csv(path):
    """Parse a written file back into ``{column: list of float}``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rd = csv.reader(fh)
        cols = next(rd)
        data = {c: [] for c in cols}
        for line in rd:
            for c, v in zip(cols, line):
                data[c].append(float(v))
    return data
