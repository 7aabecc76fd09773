import json
import logging
import math
import re
from pathlib import Path

import numpy as np
import pandas as pd

from fractals.errors import ParseError
from fractals.geometry import PointSet
from fractals.measure import DiscreteMeasure

_COORDINATE = re.compile(r"^x(\d+)$")


def _coordinate_columns(frame, source):
    """The x1..xm columns in order; a gap or an empty list is a parse error."""
    numbered = sorted((int(m.group(1)), col) for col in frame.columns if (m := _COORDINATE.match(str(col).strip())))
    if not numbered or [k for k, _ in numbered] != list(range(1, len(numbered) + 1)):
        raise ParseError(f"{source}: header must name coordinate columns x1..xm, got {list(frame.columns)}")
    return [col for _, col in numbered]


def _read_frame(file_path):
    try:
        frame = pd.read_csv(file_path, skipinitialspace=True, float_precision="round_trip")
    except FileNotFoundError as e:
        raise ParseError(f"no such file: {file_path}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ParseError(f"{file_path}: unreadable CSV ({e})") from e
    frame.columns = [str(c).strip() for c in frame.columns]
    if frame.empty:
        raise ParseError(f"{file_path}: no data rows")
    return frame


def _numeric(frame, columns, source):
    try:
        values = frame[columns].apply(pd.to_numeric, errors="raise").to_numpy(dtype=float)
    except (ValueError, TypeError) as e:
        raise ParseError(f"{source}: non-numeric entry ({e})") from e
    if not np.all(np.isfinite(values)):
        raise ParseError(f"{source}: missing or non-finite entries")
    return values


def read_measure_csv(file_path) -> DiscreteMeasure:
    """Load a discrete measure from CSV with header x1,...,xm,w."""
    frame = _read_frame(file_path)
    columns = _coordinate_columns(frame, file_path)
    if "w" not in frame.columns:
        raise ParseError(f"{file_path}: measure files need a weight column 'w'")
    points = _numeric(frame, columns, file_path)
    weights = _numeric(frame, ["w"], file_path)[:, 0]
    logging.debug(f"read {len(weights)} atoms in R^{len(columns)} from {file_path}")
    return DiscreteMeasure(points, weights)


def read_points_csv(file_path) -> PointSet:
    """Load a point set from CSV with header x1,...,xm (other columns ignored)."""
    frame = _read_frame(file_path)
    columns = _coordinate_columns(frame, file_path)
    points = _numeric(frame, columns, file_path)
    logging.debug(f"read {len(points)} points in R^{len(columns)} from {file_path}")
    return PointSet(points)


def read_json(file_path):
    try:
        with open(file_path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ParseError(f"no such file: {file_path}") from e
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ParseError(f"{file_path}: malformed JSON ({e})") from e


def _plain(value):
    """Convert numpy scalars and arrays, and non-finite floats, into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return _plain(value.item())
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def dumps_json(data) -> str:
    """Sorted keys, two-space indent, shortest round-trip floats."""
    return json.dumps(_plain(data), sort_keys=True, indent=2)


def save_json(data, output_file):
    Path(output_file).parent.mkdir(parents=True, exist_ok=True)
    with open(output_file, "w", encoding="utf-8") as f:
        f.write(dumps_json(data) + "\n")
    logging.info(f"JSON saved to {output_file}")


def records_frame(rows, columns) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=columns)


def dumps_csv(rows, columns) -> str:
    return records_frame(rows, columns).to_csv(index=False, float_format="%.17g")


def save_csv(rows, columns, output_file):
    Path(output_file).parent.mkdir(parents=True, exist_ok=True)
    records_frame(rows, columns).to_csv(output_file, index=False, float_format="%.17g")
    logging.info(f"CSV saved to {output_file}")


def coordinate_header(dim, *extra):
    return [f"x{j}" for j in range(1, dim + 1)] + list(extra)


def save_measure_csv(mu: DiscreteMeasure, output_file):
    save_csv(mu.to_records(), coordinate_header(mu.dim, "w"), output_file)


def save_points_csv(points: PointSet, output_file):
    save_csv(points.points, coordinate_header(points.dim), output_file)
