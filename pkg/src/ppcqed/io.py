"""CSV tables and atomic file output.

Numbers are written with 17 significant digits so every float round-trips
exactly; line endings are ``\\n`` and a header row is always present.
"""

import csv
import io
import json
import os
import tempfile

import numpy as np

CHEVRON_COLUMNS = ("detuning_hz", "time_s", "p_excited")
SPECTRUM_COLUMNS = ("probe_hz", "s21_re", "s21_im", "s21_abs")
MINIMA_COLUMNS = ("drive_hz", "minimum_hz")
G0_POINT_COLUMNS = ("n_photons", "g_hz", "g_err_hz")
FIT_COLUMNS = ("parameter", "value", "uncertainty")


class TableError(ValueError):
    pass


def format_value(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def table_text(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        if len(row) != len(columns):
            raise TableError(f"row has {len(row)} fields, header has {len(columns)}")
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_table(path, columns, rows):
    atomic_write_text(path, table_text(columns, rows))


def read_table(path, expected=None):
    """Read a CSV written by :func:`write_table`.

    Returns (columns, rows) with numeric fields parsed to float where possible.
    ``expected`` checks the header.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise TableError(f"{path}: empty file") from None
        if expected is not None and header != tuple(expected):
            raise TableError(f"{path}: header {header} does not match {tuple(expected)}")
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise TableError(f"{path}:{line_no}: expected {len(header)} fields")
            rows.append(tuple(_parse(v) for v in row))
    return header, rows


def _parse(v):
    try:
        return float(v)
    except ValueError:
        return v


def read_columns(path, expected):
    """Numeric columns of a table as a dict of float arrays."""
    header, rows = read_table(path, expected)
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def write_json(path, obj):
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def chevron_rows(result):
    """Row-major over detuning then time; detuning converted to Hz."""
    for i, det in enumerate(result.detunings):
        for j, t in enumerate(result.times):
            yield (det / (2 * np.pi), t, result.p_excited[i, j])


def spectrum_rows(omega, s21):
    for w, s in zip(omega, s21):
        yield (w / (2 * np.pi), s.real, s.imag, abs(s))
