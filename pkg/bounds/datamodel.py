"""Record types, the dataset container, train/calibration splitting and CSV I/O."""
import dataclasses
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence

import numpy as np
import pandas as pd

from .exceptions import ConfigurationError, OutputError, ParseError, SchemaError, SizeError

logger = logging.getLogger(__name__)

COVARIATE_PATTERN = re.compile(r'^w(\d+)$')


@dataclass(frozen=True)
class ObservedRecord:
    """One right-censored observation (W, Δ, Y)."""
    w: tuple
    y: float
    delta: int

    def __post_init__(self):
        object.__setattr__(self, 'w', tuple(float(v) for v in self.w))
        if not all(math.isfinite(v) for v in self.w):
            raise ParseError("covariates must be finite")
        if not math.isfinite(self.y) or self.y < 0:
            raise ParseError(f"follow-up time must be finite and nonnegative, got {self.y}")
        if self.delta not in (0, 1):
            raise ParseError(f"event indicator must be 0 or 1, got {self.delta}")


@dataclass(frozen=True)
class FullRecord:
    """Latent full data point (W, T, C); only simulators and oracles see it."""
    w: tuple
    t: float
    c: float

    @property
    def y(self):
        return min(self.t, self.c)

    @property
    def delta(self):
        return int(self.t <= self.c)

    def observed(self):
        return ObservedRecord(self.w, self.y, self.delta)


def _frozen(array, dtype):
    array = np.array(array, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


class Dataset:
    """Immutable column store of observed records.

    ``t`` and ``c`` are the latent survival and censoring times. They are
    present only for simulated data or held-out truth and are never used by
    the estimators themselves.
    """

    def __init__(self, w, y, delta, t=None, c=None):
        w = np.asarray(w, dtype=float)
        if w.ndim == 1:
            w = w.reshape(-1, 1)
        y = np.asarray(y, dtype=float).reshape(-1)
        delta = np.asarray(delta).reshape(-1)

        if len(y) == 0:
            raise SizeError("dataset must contain at least one record")
        if w.shape[0] != len(y) or len(delta) != len(y):
            raise SchemaError(
                f"column lengths differ: w={w.shape[0]}, y={len(y)}, delta={len(delta)}"
            )
        if w.shape[1] < 1:
            raise SchemaError("dataset needs at least one covariate")
        if not np.all(np.isfinite(w)):
            raise ParseError("covariates must be finite")
        if not np.all(np.isfinite(y)) or np.any(y < 0):
            raise ParseError("follow-up times must be finite and nonnegative")
        if not np.all(np.isin(delta, (0, 1))):
            raise ParseError("event indicators must be 0 or 1")

        self.w = _frozen(w, float)
        self.y = _frozen(y, float)
        self.delta = _frozen(delta, np.int8)
        self.t = None if t is None else _frozen(np.reshape(t, -1), float)
        self.c = None if c is None else _frozen(np.reshape(c, -1), float)
        for name in ('t', 'c'):
            latent = getattr(self, name)
            if latent is not None and len(latent) != len(y):
                raise SchemaError(f"latent column {name} has {len(latent)} rows, expected {len(y)}")

    @classmethod
    def from_records(cls, records: Sequence[ObservedRecord]):
        if not records:
            raise SizeError("dataset must contain at least one record")
        dims = {len(r.w) for r in records}
        if len(dims) != 1:
            raise SchemaError(f"inconsistent covariate dimension across records: {sorted(dims)}")
        return cls(
            w=[r.w for r in records],
            y=[r.y for r in records],
            delta=[r.delta for r in records],
        )

    @classmethod
    def from_full(cls, w, t, c):
        """Project latent (W, T, C) draws to observed form, keeping the latent columns."""
        t = np.asarray(t, dtype=float)
        c = np.asarray(c, dtype=float)
        return cls(w=w, y=np.minimum(t, c), delta=(t <= c).astype(np.int8), t=t, c=c)

    @property
    def p(self):
        return self.w.shape[1]

    @property
    def has_latent(self):
        return self.t is not None and self.c is not None

    def full_records(self):
        if not self.has_latent:
            raise SchemaError("dataset carries no latent t/c columns")
        return [FullRecord(tuple(w), float(t), float(c)) for w, t, c in zip(self.w, self.t, self.c)]

    def subset(self, indices):
        indices = np.asarray(indices, dtype=int)
        return Dataset(
            w=self.w[indices],
            y=self.y[indices],
            delta=self.delta[indices],
            t=None if self.t is None else self.t[indices],
            c=None if self.c is None else self.c[indices],
        )

    def with_censoring_observed(self):
        """Training view for fitting G from fully observed censoring times."""
        if self.c is None:
            raise SchemaError("dataset carries no latent censoring times")
        return Dataset(w=self.w, y=self.c, delta=np.zeros(len(self), dtype=np.int8))

    def __len__(self):
        return len(self.y)

    def __iter__(self) -> Iterator[ObservedRecord]:
        for w, y, delta in zip(self.w, self.y, self.delta):
            yield ObservedRecord(tuple(w), float(y), int(delta))

    def __getitem__(self, index):
        return ObservedRecord(tuple(self.w[index]), float(self.y[index]), int(self.delta[index]))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented

        def same(a, b):
            if a is None or b is None:
                return a is None and b is None
            return a.shape == b.shape and np.array_equal(a, b)

        return all(same(getattr(self, f), getattr(other, f)) for f in ('w', 'y', 'delta', 't', 'c'))

    def __repr__(self):
        return f"Dataset(N={len(self)}, p={self.p}, events={int(self.delta.sum())})"


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    cal: np.ndarray
    c_prop: float

    @property
    def n(self):
        return len(self.cal)

    @property
    def m(self):
        return len(self.train)


def calibration_size(total, c_prop):
    """Round-half-up of c_prop * total."""
    return int(math.floor(c_prop * total + 0.5))


def split(dataset: Dataset, c_prop: float, seed: int) -> SplitIndices:
    """Uniformly random train/calibration partition, deterministic in ``seed``."""
    if not 0 < c_prop < 1:
        raise ConfigurationError(f"c_prop must lie in (0, 1), got {c_prop}")
    total = len(dataset)
    n_cal = calibration_size(total, c_prop)
    if total < 2 or n_cal < 1 or total - n_cal < 1:
        raise SizeError(
            f"cannot split {total} record(s) with c_prop={c_prop} into two nonempty parts",
            n_records=total,
        )
    permutation = np.random.default_rng(seed).permutation(total)
    cal = np.sort(permutation[:n_cal])
    train = np.sort(permutation[n_cal:])
    cal.setflags(write=False)
    train.setflags(write=False)
    return SplitIndices(train=train, cal=cal, c_prop=c_prop)


def holdout_bootstrap(dataset: Dataset, n: int, rng):
    """Split into three disjoint thirds, then resample n records with replacement within each.

    Returns the (train, cal, test) datasets. ``rng`` is a numpy Generator.
    """
    total = len(dataset)
    if total < 3:
        raise SizeError(f"cannot split {total} record(s) into three nonempty parts", n_records=total)
    if n < 1:
        raise SizeError(f"bootstrap size must be at least 1, got {n}")
    parts = np.array_split(rng.permutation(total), 3)
    return tuple(dataset.subset(rng.choice(part, size=n, replace=True)) for part in parts)


@dataclass(frozen=True)
class ColumnSpec:
    """Names of the CSV columns. ``covariates=None`` picks up every ``w<k>`` column."""
    time: str = 'y'
    event: str = 'delta'
    covariates: Optional[tuple] = None
    latent_time: str = 't'
    latent_censor: str = 'c'
    require_outcome: bool = True


def covariate_columns(columns, schema: ColumnSpec):
    if schema.covariates is not None:
        missing = [name for name in schema.covariates if name not in columns]
        if missing:
            raise SchemaError(f"missing covariate column(s): {', '.join(missing)}")
        return list(schema.covariates)
    found = [(int(m.group(1)), name) for name in columns if (m := COVARIATE_PATTERN.match(name))]
    if not found:
        raise SchemaError("no covariate columns named w1..wp found in header")
    return [name for _, name in sorted(found)]


def _parse_column(frame, name):
    raw = frame[name].str.strip()
    values = pd.to_numeric(raw, errors='coerce')
    bad = values.isna() | ~np.isfinite(values.to_numpy(dtype=float))
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(
            f"cannot parse column '{name}' value {frame[name].iloc[row]!r}",
            line=row + 2,
            column=name,
        )
    # to_numeric only validates; float() parses exactly
    return raw.astype(float).to_numpy()


def read_csv(path, schema: ColumnSpec = ColumnSpec()) -> Dataset:
    """Parse a UTF-8 CSV with a header into a Dataset.

    Line numbers in parse errors count the header as line 1.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"input file not found: {path}", path=str(path))
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding='utf-8')
    except (OSError, UnicodeDecodeError, pd.errors.ParserError) as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    except pd.errors.EmptyDataError as e:
        raise SchemaError(f"{path} has no header row") from e
    frame.columns = [str(c).strip() for c in frame.columns]

    covariates = covariate_columns(frame.columns, schema)
    outcome = [schema.time, schema.event]
    missing = [name for name in outcome if name not in frame.columns]
    if missing and schema.require_outcome:
        raise SchemaError(f"missing column(s): {', '.join(missing)}")
    if len(frame) == 0:
        raise SizeError(f"{path} contains a header but no records")

    w = np.column_stack([_parse_column(frame, name) for name in covariates])
    if missing:
        # Covariate-only input (e.g. for prediction); outcome placeholders.
        y = np.zeros(len(frame))
        delta = np.zeros(len(frame), dtype=np.int8)
    else:
        y = _parse_column(frame, schema.time)
        delta = _parse_column(frame, schema.event)
        bad_y = np.flatnonzero(y < 0)
        if len(bad_y):
            raise ParseError(f"negative follow-up time {y[bad_y[0]]}", line=int(bad_y[0]) + 2, column=schema.time)
        bad_delta = np.flatnonzero(~np.isin(delta, (0.0, 1.0)))
        if len(bad_delta):
            raise ParseError(
                f"event indicator must be 0 or 1, got {delta[bad_delta[0]]}",
                line=int(bad_delta[0]) + 2,
                column=schema.event,
            )

    latent = {}
    for key, name in (('t', schema.latent_time), ('c', schema.latent_censor)):
        if name in frame.columns:
            latent[key] = _parse_column(frame, name)

    dataset = Dataset(w=w, y=y, delta=delta.astype(np.int8), **latent)
    logger.debug(f"Loaded {dataset!r} from {path}")
    return dataset


def dataset_frame(dataset: Dataset) -> pd.DataFrame:
    columns = {f"w{k + 1}": dataset.w[:, k] for k in range(dataset.p)}
    if dataset.t is not None:
        columns['t'] = dataset.t
    if dataset.c is not None:
        columns['c'] = dataset.c
    columns['y'] = dataset.y
    columns['delta'] = dataset.delta.astype(int)
    return pd.DataFrame(columns)


def _table_frame(rows, columns):
    rows = list(rows)
    records = [dataclasses.asdict(r) if dataclasses.is_dataclass(r) else dict(r) for r in rows]
    if not records:
        return pd.DataFrame(columns=list(columns or []))
    return pd.DataFrame.from_records(records, columns=columns)


def write_csv(table, path, columns=None):
    """Write a Dataset, a DataFrame or a sequence of row dicts/dataclasses.

    ``path='-'`` writes to stdout. An empty row sequence with ``columns``
    produces a header-only file.
    """
    if isinstance(table, Dataset):
        frame = dataset_frame(table)
    elif isinstance(table, pd.DataFrame):
        frame = table
    else:
        frame = _table_frame(table, columns)

    if str(path) == '-':
        frame.to_csv(sys.stdout, index=False, lineterminator='\n')
        return
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator='\n', encoding='utf-8')
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}", path=path) from e
    logger.debug(f"Wrote {len(frame)} row(s) to {path}")
