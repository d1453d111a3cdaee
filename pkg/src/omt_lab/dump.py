"""
CSV dumps of sampled paths and gamma curves.

Path files carry the header `t,re,im`; gamma files carry `theta,re,im`.
Floats are written with repr, so a dump reads back bit-exactly.
"""

import csv
import logging
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .brownian import BmPath

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _write_rows(target: Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> Path:
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return target


def write_path_csv(path: BmPath, target: PathLike) -> Path:
    """Write one path up to its exit point as `t,re,im` rows."""
    last = path.exit_index if path.stopped else len(path) - 1
    times = path.times[: last + 1]
    points = path.points[: last + 1]
    rows = (
        (float(t), float(p.real), float(p.imag))
        for t, p in zip(times, points)
    )
    return _write_rows(Path(target), ("t", "re", "im"), rows)


def numbered_path(target: PathLike, index: int) -> Path:
    """`runs/paths.csv`, 3 -> `runs/paths-3.csv`."""
    target = Path(target)
    suffix = target.suffix or ".csv"
    return target.with_name(f"{target.stem}-{index}{suffix}")


def write_paths_csv(paths: Sequence[BmPath], target: PathLike, cap: int) -> list[Path]:
    """
    Write at most `cap` paths, one file per path, named `<stem>-<index><suffix>`.

    Returns:
        Written file paths in path order
    """
    written = [write_path_csv(path, numbered_path(target, index))
               for index, path in enumerate(paths[:max(cap, 0)])]
    logger.info(f"Wrote {len(written)} path dump(s) next to {target}")
    return written


def write_gamma_csv(thetas: np.ndarray, points: np.ndarray, target: PathLike) -> Path:
    """Write gamma curve samples as `theta,re,im` rows."""
    rows = (
        (float(theta), float(point.real), float(point.imag))
        for theta, point in zip(np.asarray(thetas), np.asarray(points))
    )
    written = _write_rows(Path(target), ("theta", "re", "im"), rows)
    logger.info(f"Wrote gamma curve ({len(thetas)} points) to {written}")
    return written
