"""
Structured-grid geometry files.

Format: a header line ``L rows cols`` followed by L lines ``x y z measure weight``,
whitespace delimited, written with 17 significant digits.
"""
import logging

import numpy as np

from config import settings
from config.errors import ArchiveError, TopologyError
from geometry.shape import DiscreteShape

logger = logging.getLogger(__name__)


def write_geometry(shape: DiscreteShape, path: str) -> None:
    rows, cols = shape.topology
    table = np.column_stack([shape.nodes, shape.measures, shape.weights])
    try:
        with open(path, "w", newline="\n") as f:
            f.write(f"{shape.size} {rows} {cols}\n")
            np.savetxt(f, table, fmt=settings.FLOAT_FORMAT, delimiter=" ")
    except OSError as e:
        logger.error(f"Error writing geometry file {path}: {e}")
        raise ArchiveError(f"cannot write geometry file {path}: {e}") from e
    logger.debug(f"Wrote {shape.size} nodes to {path}")


def read_geometry(path: str, mirrored: bool = False, waterline=None) -> DiscreteShape:
    try:
        with open(path, "r") as f:
            header = f.readline().split()
            table = np.loadtxt(f, dtype=float, ndmin=2)
    except OSError as e:
        logger.error(f"Error reading geometry file {path}: {e}")
        raise ArchiveError(f"cannot read geometry file {path}: {e}") from e
    if len(header) != 3:
        raise TopologyError(f"{path}: header must be 'L rows cols'")
    size, rows, cols = (int(v) for v in header)
    if table.shape != (size, 5):
        raise TopologyError(f"{path}: expected {size} rows of 5 values, got {table.shape}")
    return DiscreteShape(table[:, :3], table[:, 3], table[:, 4], (rows, cols),
                         mirrored=mirrored, waterline=waterline)
