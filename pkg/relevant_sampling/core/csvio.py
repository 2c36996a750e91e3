"""CSV import and export for bases, functions, sample sets and value vectors.

Floats are written with ``repr`` so a write-read cycle is exact. Files that
carry parameters start with a ``#meta`` row of key=value cells.
"""

import csv
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from relevant_sampling.core.blfunc import BandlimitedFunction
from relevant_sampling.core.exceptions import ConfigError
from relevant_sampling.core.prolate import ProlateBasis1D, TensorBasis
from relevant_sampling.core.sampling import SampleSet

META_PREFIX = "#meta"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _meta_row(**items) -> List[str]:
    return [META_PREFIX] + [f"{key}={_fmt(value)}" for key, value in items.items()]


def _parse_meta(row: List[str], path: str) -> Dict[str, str]:
    if not row or row[0] != META_PREFIX:
        raise ConfigError(f"Expected a '{META_PREFIX}' header row", path=path, line=1)
    meta = {}
    for cell in row[1:]:
        key, sep, value = cell.partition("=")
        if not sep:
            raise ConfigError(f"Malformed meta cell '{cell}'", path=path, line=1)
        meta[key] = value
    return meta


def _read_rows(path) -> List[List[str]]:
    try:
        with open(path, "r", newline="", encoding="utf-8") as f:
            return [row for row in csv.reader(f) if row]
    except OSError as e:
        raise ConfigError(f"Failed to read CSV file: {e}", path=str(path))


def _write_rows(path, rows) -> None:
    path = Path(path)
    if path.parent != Path(""):
        path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerows(rows)


def _floats(row: List[str], path: str, line: int) -> List[float]:
    try:
        return [float(cell) for cell in row]
    except ValueError:
        raise ConfigError(f"Non-numeric value in row {row}", path=path, line=line)


def write_basis_csv(basis: Union[ProlateBasis1D, TensorBasis], path) -> None:
    """``k,mu_k`` for a 1-D basis; ``j,lambda_j,i_1..i_d`` for a tensor basis (0-based)."""
    if isinstance(basis, ProlateBasis1D):
        rows = [["k", "mu_k"]]
        rows += [[k, _fmt(mu)] for k, mu in enumerate(basis.mu)]
    else:
        rows = [["j", "lambda_j"] + [f"i_{axis + 1}" for axis in range(basis.dim)]]
        for j, (lam, index) in enumerate(zip(basis.lam, basis.multi_indices)):
            rows.append([j, _fmt(lam)] + [int(i) for i in index])
    _write_rows(path, rows)


def write_function_csv(f: BandlimitedFunction, path) -> None:
    rows = [_meta_row(R=f.tb.R, d=f.tb.dim, N=f.tb.N, M=f.M, seed=f.seed), ["j", "c_j"]]
    rows += [[j, _fmt(c)] for j, c in enumerate(f.coeffs)]
    _write_rows(path, rows)


def read_function_csv(path, tb: TensorBasis) -> BandlimitedFunction:
    """Read coefficients back onto ``tb``; the header must agree with it.

    Raises:
        ConfigError: on a malformed file or a header that does not match ``tb``
    """
    path = str(path)
    rows = _read_rows(path)
    if len(rows) < 2:
        raise ConfigError("Function file is truncated", path=path)
    meta = _parse_meta(rows[0], path)
    try:
        if float(meta["R"]) != tb.R or int(meta["d"]) != tb.dim or int(meta["N"]) != tb.N:
            raise ConfigError(
                f"File basis (R={meta['R']}, d={meta['d']}, N={meta['N']}) does not match "
                f"(R={tb.R}, d={tb.dim}, N={tb.N})",
                path=path,
                line=1,
            )
        seed = int(meta["seed"]) if meta.get("seed") else None
    except (KeyError, ValueError) as e:
        raise ConfigError(f"Invalid function header: {e}", path=path, line=1)

    coeffs = [_floats(row, path, line)[1] for line, row in enumerate(rows[2:], start=3)]
    return BandlimitedFunction(tb=tb, coeffs=np.array(coeffs), seed=seed)


def write_samples_csv(samples: SampleSet, path) -> None:
    rows = [
        _meta_row(R=samples.R, d=samples.d, r=samples.r, seed=samples.seed),
        [f"x_{axis + 1}" for axis in range(samples.d)],
    ]
    rows += [[_fmt(x) for x in point] for point in samples.points]
    _write_rows(path, rows)


def read_samples_csv(path) -> SampleSet:
    path = str(path)
    rows = _read_rows(path)
    if len(rows) < 2:
        raise ConfigError("Sample file is truncated", path=path)
    meta = _parse_meta(rows[0], path)
    try:
        R, d = float(meta["R"]), int(meta["d"])
        seed = int(meta["seed"]) if meta.get("seed") else None
    except (KeyError, ValueError) as e:
        raise ConfigError(f"Invalid sample header: {e}", path=path, line=1)

    points = [_floats(row, path, line) for line, row in enumerate(rows[2:], start=3)]
    if not points:
        raise ConfigError("Sample file holds no points", path=path)
    if any(len(point) != d for point in points):
        raise ConfigError(f"Every sample row must have {d} coordinates", path=path)
    return SampleSet(R=R, d=d, points=np.array(points), seed=seed)


def write_table_csv(header: List[str], rows, path) -> None:
    """Plain table with a header row; used for reports."""
    _write_rows(path, [header] + [[_fmt(cell) for cell in row] for row in rows])


def write_values_csv(sampled, path, name: str = "value") -> None:
    """``j,<name>`` rows, one per entry."""
    rows = [["j", name]] + [[j, _fmt(v)] for j, v in enumerate(np.asarray(sampled, dtype=float))]
    _write_rows(path, rows)


def read_values_csv(path) -> Tuple[str, np.ndarray]:
    """Column name and values of a ``j,<name>`` file."""
    path = str(path)
    rows = _read_rows(path)
    if not rows or len(rows[0]) != 2:
        raise ConfigError("Expected a two-column 'j,<name>' header", path=path, line=1)
    entries = [_floats(row, path, line)[1] for line, row in enumerate(rows[1:], start=2)]
    return rows[0][1], np.array(entries)
