"""Point clouds, metrics, seeded shape generators and CSV I/O.

Random draws come from a PCG-64 uniform stream (``numpy.random.PCG64``);
Gaussian variates are produced from that stream with the Box-Muller
transform so that a seed fixes every generated coordinate.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._validation import check_points
from .exceptions import CsvParseError, DimensionMismatchError, DomainError, ConfigurationError


class Metric(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    COSINE = "cosine"

    @classmethod
    def coerce(cls, value) -> "Metric":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigurationError(f"unknown metric {value!r}") from None


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ordered, immutable point cloud in R^dim.

    Row ``i`` of ``points`` is the point with id ``i``. ``expected_betti``
    is the topology a synthetic generator declares for its shape, or
    ``None`` for loaded data.
    """

    points: np.ndarray
    expected_betti: tuple | None = field(default=None)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2:
            raise DimensionMismatchError(f"points must be 2-D, got shape {pts.shape}")
        if pts.shape[1] < 1:
            raise DimensionMismatchError("dim must be >= 1")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.expected_betti is not None:
            object.__setattr__(self, "expected_betti", tuple(int(b) for b in self.expected_betti))

    @classmethod
    def empty(cls, dim: int) -> "Dataset":
        return cls(np.empty((0, dim)))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.points, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))

    __hash__ = None


def _rng(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**64:
        raise ConfigurationError(f"seed must be an unsigned 64-bit integer, got {seed!r}")
    return np.random.Generator(np.random.PCG64(int(seed)))


def _box_muller(rng, size):
    """``size`` standard normal variates from the uniform stream of ``rng``."""
    pairs = (size + 1) // 2
    # 1 - U keeps the log argument in (0, 1]
    u1 = 1.0 - rng.random(pairs)
    u2 = rng.random(pairs)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(2.0 * np.pi * u2)
    z[1::2] = r * np.sin(2.0 * np.pi * u2)
    return z[:size]


def generate_circle(n: int, radius: float = 1.0, noise_sigma: float = 0.0, seed: int = 0) -> Dataset:
    """Sample ``n`` points from a circle with isotropic Gaussian noise.

    Angles are uniform on [0, 2*pi); each coordinate then receives
    independent noise of standard deviation ``noise_sigma``.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise ConfigurationError(f"n must be a positive integer, got {n!r}")
    if radius <= 0:
        raise ConfigurationError(f"radius must be positive, got {radius}")
    if noise_sigma < 0:
        raise ConfigurationError(f"noise_sigma must be nonnegative, got {noise_sigma}")
    n = int(n)
    rng = _rng(seed)
    theta = 2.0 * np.pi * rng.random(n)
    points = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    if noise_sigma > 0:
        points = points + noise_sigma * _box_muller(rng, 2 * n).reshape(n, 2)
    return Dataset(points, expected_betti=(1, 1))


def generate_blobs(centers, n_per: int, sigma: float = 1.0, seed: int = 0) -> Dataset:
    """Isotropic Gaussian blobs, ``n_per`` points per center, in center order."""
    centers = [np.asarray(c, dtype=float).ravel() for c in centers]
    if not centers:
        raise ConfigurationError("at least one center is required")
    dims = {c.shape[0] for c in centers}
    if len(dims) != 1:
        raise DimensionMismatchError(f"centers have mixed dimensions {sorted(dims)}")
    if isinstance(n_per, bool) or int(n_per) != n_per or n_per < 1:
        raise ConfigurationError(f"n_per must be a positive integer, got {n_per!r}")
    if sigma < 0:
        raise ConfigurationError(f"sigma must be nonnegative, got {sigma}")
    n_per = int(n_per)
    dim = dims.pop()
    rng = _rng(seed)
    blocks = []
    for c in centers:
        noise = _box_muller(rng, n_per * dim).reshape(n_per, dim)
        blocks.append(c + sigma * noise)
    return Dataset(np.vstack(blocks), expected_betti=(len(centers), 0))


def pairwise_distances(X, metric="euclidean", Y=None) -> np.ndarray:
    """Dense distance matrix between the rows of ``X`` (and ``Y``).

    Cosine distance is ``1 - <x, y> / (|x| |y|)`` and is undefined for zero
    vectors. It is symmetric and nonnegative but not a true metric: the
    triangle inequality can fail.
    """
    metric = Metric.coerce(metric)
    X = check_points(X, allow_empty=True)
    same = Y is None
    Y = X if same else check_points(Y, allow_empty=True, name="Y")
    if X.shape[1] != Y.shape[1]:
        raise DimensionMismatchError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")

    if metric is Metric.EUCLIDEAN:
        diff = X[:, None, :] - Y[None, :, :]
        D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    else:
        nx = np.linalg.norm(X, axis=1)
        ny = nx if same else np.linalg.norm(Y, axis=1)
        if np.any(nx == 0) or np.any(ny == 0):
            raise DomainError("cosine distance is undefined for zero vectors")
        D = 1.0 - (X / nx[:, None]) @ (Y / ny[:, None]).T
        np.clip(D, 0.0, 2.0, out=D)
    if same:
        D = 0.5 * (D + D.T)
        np.fill_diagonal(D, 0.0)
    return D


def format_real(x: float) -> str:
    """Shortest round-trip decimal, with integral values written bare (``1``)."""
    text = repr(float(x))
    if text.endswith(".0"):
        text = text[:-2]
    return text


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_csv_rows(text: str):
    """Parse CSV text into (header or None, list of float rows).

    Raises :class:`CsvParseError` naming the 1-based line of a ragged or
    non-numeric row.
    """
    rows = [(line, r) for line, r in enumerate(csv.reader(io.StringIO(text)), start=1) if r]
    header = None
    if rows and not all(_is_number(tok) for tok in rows[0][1]):
        header = [tok.strip() for tok in rows.pop(0)[1]]
    width = len(header) if header is not None else (len(rows[0][1]) if rows else None)
    values = []
    for line, row in rows:
        if len(row) != width:
            raise CsvParseError(f"expected {width} fields, found {len(row)}", row=line)
        try:
            values.append([float(tok) for tok in row])
        except ValueError:
            raise CsvParseError(f"non-numeric field in {row!r}", row=line) from None
    return header, values


def load_csv(path, dim: int | None = None) -> Dataset:
    """Read a point cloud from CSV.

    A first row containing any non-numeric token is treated as a header.
    An empty file yields an empty dataset of dimension ``dim`` (or the
    header width, or 1).
    """
    text = Path(path).read_text(encoding="utf-8")
    header, values = read_csv_rows(text)
    if not values:
        inferred = dim or (len(header) if header else 1)
        return Dataset.empty(inferred)
    points = np.array(values, dtype=float)
    if dim is not None and points.shape[1] != dim:
        raise DimensionMismatchError(f"expected dim {dim}, file has {points.shape[1]}")
    return Dataset(points)


def dumps_csv(points, header=None) -> str:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    lines = []
    if header is not None:
        lines.append(",".join(header))
    for row in points:
        lines.append(",".join(format_real(x) for x in row))
    return "".join(line + "\n" for line in lines)


def save_csv(dataset, path, header=None) -> None:
    """Write one row per point, UTF-8 with LF line endings."""
    points = dataset.points if isinstance(dataset, Dataset) else dataset
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_csv(points, header=header))

