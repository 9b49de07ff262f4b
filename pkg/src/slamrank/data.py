"""Ranking datasets: file parsing, synthetic generation, statistics and model files.

The on-disk ranking format is one document per line::

    <grade> qid:<id> <idx>:<val> ... [# comment]

with 1-based, strictly increasing feature indices. Consecutive lines with the
same qid form one query.
"""

import io
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionError,
    EmptyDatasetError,
    FormatError,
    InvalidGradeError,
    ParameterError,
    ParseError,
)
from .measures import as_measure
from .query import QueryInstance

MODEL_HEADER = "slamrank-model v1"
SIDECAR_HEADER = "slamrank-synthetic v1"
# widens level spacing so rounding in X @ u cannot push a margin below gamma
_MARGIN_SLACK = 1e-9


@dataclass(frozen=True)
class DatasetStats:
    n: int
    d: int
    m_max: int
    R_X: float
    grade_histogram: dict


class Dataset:
    """Immutable sequence of queries sharing one feature dimension.

    Queries without documents are dropped on construction.
    """

    def __init__(self, queries, d=None):
        queries = [q for q in queries if q.m > 0]
        dims = {q.d for q in queries}
        if len(dims) > 1:
            raise DimensionError(f"queries disagree on feature dimension: {sorted(dims)}")
        if d is None:
            d = dims.pop() if dims else 0
        elif dims and dims != {d}:
            raise DimensionError(f"queries have d={dims.pop()}, expected {d}")
        self._queries = tuple(queries)
        self.d = d
        self._packed = None
        self.stats = dataset_stats(self) if queries else None

    def __len__(self):
        return len(self._queries)

    def __iter__(self):
        return iter(self._queries)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return Dataset(self._queries[idx], d=self.d)
        return self._queries[idx]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.d == other.d and self._queries == other._queries

    __hash__ = None

    def subset(self, indices):
        return Dataset([self._queries[i] for i in indices], d=self.d)

    def packed(self):
        """Concatenated ``(X, R, offsets)`` arrays for the ragged kernels."""
        if self._packed is None:
            if not self._queries:
                raise EmptyDatasetError("dataset has no queries")
            X = np.ascontiguousarray(np.vstack([q.X for q in self._queries]))
            R = np.concatenate([q.R for q in self._queries]).astype(np.int64)
            offsets = np.zeros(len(self._queries) + 1, dtype=np.int64)
            offsets[1:] = np.cumsum([q.m for q in self._queries])
            self._packed = (X, R, offsets)
        return self._packed

    def weights(self, measure):
        """Concatenated SLAM weights of every query for ``measure``."""
        from .surrogate import weights_for

        measure = as_measure(measure)
        return np.concatenate([weights_for(measure, q.R).v for q in self._queries])


def dataset_stats(ds):
    queries = list(ds)
    if not queries:
        raise EmptyDatasetError("dataset has no queries")
    grades = Counter()
    r_x = 0.0
    for q in queries:
        grades.update(int(g) for g in q.R)
        r_x = max(r_x, float(np.sqrt((q.X * q.X).sum(axis=1)).max()))
    return DatasetStats(
        n=len(queries),
        d=queries[0].d,
        m_max=max(q.m for q in queries),
        R_X=r_x,
        grade_histogram=dict(sorted(grades.items())),
    )


# --------------------------------------------------------------------------
# ranking file format
# --------------------------------------------------------------------------


def _parse_line(text, lineno):
    body = text.split("#", 1)[0].strip()
    if not body:
        return None
    tokens = body.split()
    try:
        grade = int(tokens[0])
    except ValueError:
        raise ParseError(f"grade {tokens[0]!r} is not an integer", lineno) from None
    if grade < 0:
        raise ParseError(f"negative grade {grade}", lineno)
    if len(tokens) < 2 or not tokens[1].startswith("qid:") or len(tokens[1]) == 4:
        raise ParseError("expected 'qid:<id>' after the grade", lineno)
    qid = tokens[1][4:]
    feats = {}
    last = 0
    for tok in tokens[2:]:
        idx, sep, val = tok.partition(":")
        if not sep:
            raise ParseError(f"feature token {tok!r} lacks ':'", lineno)
        try:
            i = int(idx)
            x = float(val)
        except ValueError:
            raise ParseError(f"bad feature token {tok!r}", lineno) from None
        if i <= last:
            raise ParseError(f"feature index {i} not strictly increasing", lineno)
        if not np.isfinite(x):
            raise ParseError(f"non-finite feature value {val!r}", lineno)
        feats[i] = x
        last = i
    return grade, qid, feats


def parse_ranking_file(source, max_grade=None):
    """Read a ranking file from a path, a text/binary stream or bytes.

    Feature indices missing on a line are 0.0; ``d`` is the largest index in
    the whole file. A qid that reappears after another qid is an error.
    """
    if isinstance(source, (bytes, bytearray)):
        stream = io.StringIO(bytes(source).decode("utf-8"))
    elif isinstance(source, (str, os.PathLike)):
        with open(source, encoding="utf-8", newline="") as fh:
            return parse_ranking_file(io.StringIO(fh.read()), max_grade)
    else:
        stream = source

    groups = []  # (qid, [(grade, feats), ...])
    seen = set()
    d = 0
    for lineno, raw in enumerate(stream, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        parsed = _parse_line(raw.rstrip("\r\n"), lineno)
        if parsed is None:
            continue
        grade, qid, feats = parsed
        if max_grade is not None and grade > max_grade:
            raise ParseError(f"grade {grade} exceeds maximum {max_grade}", lineno)
        if not groups or groups[-1][0] != qid:
            if qid in seen:
                raise ParseError(f"qid {qid} reappears after other queries", lineno)
            seen.add(qid)
            groups.append((qid, []))
        groups[-1][1].append((grade, feats))
        if feats:
            d = max(d, max(feats))

    if not groups:
        raise EmptyDatasetError("no documents found in input")
    queries = []
    for qid, docs in groups:
        X = np.zeros((len(docs), d))
        R = np.empty(len(docs), dtype=np.int64)
        for row, (grade, feats) in enumerate(docs):
            R[row] = grade
            for i, x in feats.items():
                X[row, i - 1] = x
        try:
            queries.append(QueryInstance(X, R, qid=qid, max_grade=max_grade))
        except InvalidGradeError as exc:
            raise ParseError(str(exc)) from exc
    return Dataset(queries, d=d)


def _fmt(x):
    return repr(float(x))


def write_ranking_file(ds, target):
    """Write every feature explicitly; floats use shortest round-trip repr."""
    lines = []
    for num, q in enumerate(ds, start=1):
        qid = q.qid or str(num)
        for row in range(q.m):
            feats = " ".join(f"{f + 1}:{_fmt(x)}" for f, x in enumerate(q.X[row]))
            lines.append(f"{int(q.R[row])} qid:{qid} {feats}".rstrip())
    text = "\n".join(lines) + "\n"
    if isinstance(target, (str, os.PathLike)):
        with open(target, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        target.write(text)


# --------------------------------------------------------------------------
# synthetic data
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters of :func:`generate_synthetic`.

    With ``gamma > 0`` grade levels are placed ``gamma * (1 + noise)`` apart
    along a unit direction, with in-level jitter of width ``gamma * noise``,
    so adjacent levels stay at least ``gamma`` apart. With ``gamma == 0`` the
    projection is ``level + noise * N(0, 1)`` and classes may overlap.
    """

    n: int
    m: int
    d: int
    gamma: float = 1.0
    grades: tuple = (0, 1)
    noise: float = 0.0
    seed: int = 0
    r_x: float = 1.0

    def __post_init__(self):
        grades = tuple(sorted({int(g) for g in self.grades}))
        object.__setattr__(self, "grades", grades)
        if self.n < 1 or self.m < 1 or self.d < 1:
            raise ParameterError("n, m and d must be positive")
        if not grades or grades[0] < 0:
            raise ParameterError("grade set must be nonempty and nonnegative")
        if self.gamma < 0 or self.noise < 0 or not self.r_x > 0:
            raise ParameterError("gamma and noise must be >= 0, r_x > 0")
        if self.gamma > 0 and (self.m < 2 or len(grades) < 2):
            raise ParameterError("a positive margin needs m >= 2 and at least two grades")
        if self.gamma > 0 and self.d < 2:
            raise ParameterError("a positive margin needs d >= 2")


@dataclass(frozen=True)
class SyntheticResult:
    dataset: Dataset
    u_star: np.ndarray
    gamma_realized: float


def realized_margin(ds, u):
    """``min`` over queries and pairs with ``R_i > R_j`` of ``u.(x_i - x_j)``.

    ``inf`` when no such pair exists.
    """
    best = np.inf
    for q in ds:
        s = q.X @ u
        for g in np.unique(q.R)[1:]:
            hi = s[q.R >= g].min()
            lo = s[q.R < g].max()
            best = min(best, hi - lo)
    return float(best)


def generate_synthetic(spec):
    """Draw a dataset together with a unit direction ranking it with margin.

    Returns ``(dataset, u_star, gamma_realized)``. Rows are bounded by
    ``spec.r_x`` in l2 norm with equality attained; for ``gamma > 0`` only the
    component orthogonal to ``u_star`` is shrunk, so the margin survives
    whenever ``gamma * (levels - 1) * (1 + noise) / 2 <= r_x``. Otherwise the
    component along ``u_star`` is compressed to fit and the smaller realized
    margin is reported.
    """
    rng = np.random.default_rng(spec.seed)
    u = rng.standard_normal(spec.d)
    u /= np.linalg.norm(u)
    levels = np.array(spec.grades)
    center = (len(levels) - 1) / 2.0
    queries = []
    for qnum in range(spec.n):
        lvl = rng.integers(0, len(levels), size=spec.m)
        R = levels[lvl]
        Z = rng.standard_normal((spec.m, spec.d))
        ortho = Z - np.outer(Z @ u, u)
        if spec.gamma > 0:
            jitter = rng.uniform(-0.5, 0.5, size=spec.m)
            step = spec.gamma * (1.0 + _MARGIN_SLACK)
            proj = step * ((1.0 + spec.noise) * (lvl - center) + spec.noise * jitter)
        else:
            proj = (lvl - center) + spec.noise * rng.standard_normal(spec.m)
        queries.append((proj, ortho, R, str(qnum + 1)))

    r2 = spec.r_x ** 2
    if spec.gamma > 0:
        widest = max(np.abs(p).max() for p, _, _, _ in queries)
        if widest > spec.r_x:
            # margin too wide for the ball: compress along u_star only
            queries = [(p * (spec.r_x / widest), o, R, q) for p, o, R, q in queries]
    rows = []
    for proj, ortho, R, qid in queries:
        if spec.gamma > 0:
            room = np.sqrt(np.maximum(r2 - proj ** 2, 0.0))
            on = np.linalg.norm(ortho, axis=1)
            shrink = np.minimum(1.0, np.divide(room, on, out=np.ones_like(on), where=on > 0))
            X = np.outer(proj, u) + ortho * shrink[:, None]
        else:
            X = np.outer(proj, u) + ortho
            nrm = np.linalg.norm(X, axis=1)
            X *= np.minimum(1.0, spec.r_x / np.where(nrm > 0, nrm, 1.0))[:, None]
        rows.append((X, R, qid))

    peak = max(np.linalg.norm(X, axis=1).max() for X, _, _ in rows)
    if peak > 0 and (peak > spec.r_x or not np.isclose(peak, spec.r_x, rtol=0, atol=1e-12)):
        # global rescale so the largest row norm equals the target exactly
        factor = spec.r_x / peak
        rows = [(X * factor, R, qid) for X, R, qid in rows]
    ds = Dataset([QueryInstance(X, R, qid=qid) for X, R, qid in rows], d=spec.d)
    return SyntheticResult(ds, u, realized_margin(ds, u))


def train_test_split(ds, test_fraction=0.25, seed=0):
    """Shuffle query indices with ``seed`` and split them into two datasets."""
    if not 0 < test_fraction < 1:
        raise ParameterError("test_fraction must be in (0, 1)")
    n = len(ds)
    n_test = int(round(n * test_fraction))
    if n_test == 0 or n_test == n:
        raise ParameterError(f"cannot split {n} queries with fraction {test_fraction}")
    perm = np.random.default_rng(seed).permutation(n)
    return ds.subset(sorted(perm[n_test:])), ds.subset(sorted(perm[:n_test]))


# --------------------------------------------------------------------------
# model and sidecar files
# --------------------------------------------------------------------------


def save_model(w, path, measure="ndcg", delta=1.0):
    w = np.asarray(getattr(w, "w", w), dtype=np.float64)
    if w.ndim != 1 or not np.all(np.isfinite(w)):
        raise ValueError("model must be a finite 1-d vector")
    tag = as_measure(measure).tag
    text = "\n".join(
        [MODEL_HEADER, str(w.size), f"{tag} {_fmt(delta)}", " ".join(_fmt(x) for x in w)]
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


@dataclass(frozen=True)
class LoadedModel:
    w: np.ndarray
    measure: str = "ndcg"
    delta: float = 1.0
    extra: dict = field(default_factory=dict)


def _float_tokens(tokens, what):
    try:
        vals = np.array([float(t) for t in tokens])
    except ValueError:
        raise FormatError(f"non-numeric token in {what}") from None
    if not np.all(np.isfinite(vals)):
        raise FormatError(f"non-finite value in {what}")
    return vals


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    if not lines or lines[0].strip() != MODEL_HEADER:
        raise FormatError(f"missing header {MODEL_HEADER!r}")
    if len(lines) < 4:
        raise FormatError("model file is truncated")
    try:
        d = int(lines[1].strip())
    except ValueError:
        raise FormatError("second line must hold the dimension") from None
    meta = lines[2].split()
    if len(meta) != 2:
        raise FormatError("third line must hold '<measure> <delta>'")
    try:
        measure = as_measure(meta[0]).tag
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    delta = _float_tokens([meta[1]], "delta")[0]
    w = _float_tokens(lines[3].split(), "parameters")
    if w.size != d:
        raise FormatError(f"header declares d={d} but {w.size} values follow")
    return LoadedModel(w, measure, float(delta))


def save_sidecar(path, u_star, gamma_realized):
    u = np.asarray(u_star, dtype=np.float64)
    text = "\n".join(
        [
            SIDECAR_HEADER,
            f"gamma_realized {_fmt(gamma_realized)}",
            str(u.size),
            " ".join(_fmt(x) for x in u),
        ]
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text + "\n")


def load_sidecar(path):
    """Return ``(u_star, gamma_realized)`` from a generator sidecar file."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    if len(lines) < 4 or lines[0].strip() != SIDECAR_HEADER:
        raise FormatError("not a slamrank synthetic sidecar")
    key, _, val = lines[1].partition(" ")
    if key != "gamma_realized":
        raise FormatError("second line must be 'gamma_realized <value>'")
    gamma = _float_tokens([val], "gamma_realized")[0]
    try:
        d = int(lines[2])
    except ValueError:
        raise FormatError("third line must hold the dimension") from None
    u = _float_tokens(lines[3].split(), "u_star")
    if u.size != d:
        raise FormatError(f"sidecar declares d={d} but {u.size} values follow")
    return u, float(gamma)


def load_vector(path):
    """Load a comparator vector from either a model file or a sidecar.

    Sidecars yield ``u_star / gamma_realized``, the scaled comparator for
    which every margin is at least 1.
    """
    with open(path, encoding="utf-8") as fh:
        head = fh.readline().strip()
    if head == MODEL_HEADER:
        return load_model(path).w
    if head == SIDECAR_HEADER:
        u, gamma = load_sidecar(path)
        if not gamma > 0:
            raise FormatError("sidecar margin is not positive")
        return u / gamma
    raise FormatError(f"unrecognized vector file header {head!r}")
