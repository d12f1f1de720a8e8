"""Metric s-t-path TSP instances: construction, validation, I/O and generators."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

__all__ = [
    "MetricInstance",
    "TourResult",
    "InstanceFormatError",
    "MetricViolationError",
    "MetricReport",
    "validate_metric",
    "metric_closure",
    "parse_instance",
    "serialize_instance",
    "load_instance",
    "gen_random",
    "FAMILIES",
]

FAMILIES = ("euclidean-unit-square", "random-metric-closure")

# Float slack for the triangle inequality; Euclidean distances of collinear
# points can miss it by an ulp.
METRIC_RTOL = 1e-12


class InstanceFormatError(ValueError):
    """Malformed instance text. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MetricViolationError(ValueError):
    def __init__(self, report: "MetricReport"):
        self.report = report
        super().__init__(report.message)


@dataclass(frozen=True)
class MetricReport:
    ok: bool
    kind: str | None = None  # "shape", "diagonal", "negative", "symmetry", "triangle", "endpoint"
    where: tuple[int, ...] = ()
    message: str = "ok"

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class MetricInstance:
    """A finite metric on vertices ``0..n-1`` with endpoints ``s`` and ``t``.

    ``cost`` is either a float64 matrix or, in exact mode, an object matrix of
    :class:`fractions.Fraction`. The array is made read-only on construction.
    ``s == t`` asks for a Hamiltonian circuit through ``s``.
    """

    cost: np.ndarray
    s: int
    t: int
    name: str = ""
    points: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        cost = self.cost
        if not isinstance(cost, np.ndarray):
            cost = np.asarray(cost, dtype=float)
        if cost.dtype != object:
            cost = np.array(cost, dtype=float)
        else:
            cost = cost.copy()
        cost.setflags(write=False)
        object.__setattr__(self, "cost", cost)
        report = validate_metric(self)
        if not report.ok:
            raise MetricViolationError(report)

    @property
    def n(self) -> int:
        return self.cost.shape[0]

    @property
    def exact(self) -> bool:
        return self.cost.dtype == object

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def c(self, u: int, v: int):
        return self.cost[u, v]

    def as_exact(self) -> "MetricInstance":
        """Same instance with every cost converted exactly to a Fraction."""
        if self.exact:
            return self
        frac = np.empty(self.cost.shape, dtype=object)
        for i in range(self.n):
            for j in range(self.n):
                frac[i, j] = Fraction(float(self.cost[i, j]))
        frac.setflags(write=False)
        # The float matrix passed the triangle check up to METRIC_RTOL; its exact
        # binary values can still miss a tight triangle by one ulp, so the copy
        # is not re-validated strictly.
        copy = object.__new__(MetricInstance)
        for name, val in (("cost", frac), ("s", self.s), ("t", self.t), ("name", self.name), ("points", self.points)):
            object.__setattr__(copy, name, val)
        return copy

    def as_float(self) -> "MetricInstance":
        if not self.exact:
            return self
        return MetricInstance(self.cost.astype(float), self.s, self.t, self.name, self.points)

    def tour_cost(self, order: Sequence[int], closed: bool | None = None):
        if closed is None:
            closed = self.s == self.t
        total = sum((self.cost[u, v] for u, v in zip(order, order[1:])), self.cost[0, 0] * 0)
        if closed and len(order) > 1:
            total += self.cost[order[-1], order[0]]
        return total


@dataclass(frozen=True)
class TourResult:
    """An s-t Hamiltonian path (or a circuit when ``s == t``, not repeating ``s`` at the end)."""

    order: tuple[int, ...]
    cost: float
    closed: bool = False

    def check(self, inst: MetricInstance, rtol: float = 1e-12) -> None:
        if sorted(self.order) != list(range(inst.n)):
            raise AssertionError(f"tour is not a permutation of 0..{inst.n - 1}: {self.order}")
        if self.order[0] != inst.s or (not self.closed and self.order[-1] != inst.t):
            raise AssertionError(f"tour {self.order} does not run from {inst.s} to {inst.t}")
        recomputed = float(inst.tour_cost(self.order, self.closed))
        if not math.isclose(recomputed, float(self.cost), rel_tol=rtol, abs_tol=1e-15):
            raise AssertionError(f"tour cost {self.cost} != recomputed {recomputed}")

    def to_dict(self) -> dict:
        return {"order": list(self.order), "cost": float(self.cost), "closed": self.closed}


def _report(kind: str, where: tuple[int, ...], message: str) -> MetricReport:
    return MetricReport(False, kind, where, message)


def validate_metric(inst: MetricInstance | np.ndarray, s: int | None = None, t: int | None = None) -> MetricReport:
    """Check symmetry, zero diagonal, nonnegativity, triangle inequality and endpoints.

    Never raises; returns the first violation found. Accepts either an instance
    or a bare matrix (then ``s``/``t`` are optional).
    """
    if isinstance(inst, MetricInstance):
        cost, s, t = inst.cost, inst.s, inst.t
    else:
        cost = np.asarray(inst)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1] or cost.shape[0] == 0:
        return _report("shape", (), f"cost matrix must be square and nonempty, got shape {cost.shape}")
    n = cost.shape[0]
    exact = cost.dtype == object
    for i in range(n):
        if cost[i, i] != 0:
            return _report("diagonal", (i,), f"cost[{i}][{i}] = {cost[i, i]} is not zero")
    for i in range(n):
        for j in range(i + 1, n):
            if cost[i, j] < 0:
                return _report("negative", (i, j), f"cost[{i}][{j}] = {cost[i, j]} is negative")
            if cost[i, j] != cost[j, i]:
                return _report("symmetry", (i, j), f"cost[{i}][{j}] = {cost[i, j]} != cost[{j}][{i}] = {cost[j, i]}")
    if exact:
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    if cost[i, k] > cost[i, j] + cost[j, k]:
                        return _report("triangle", (i, j, k), f"triangle inequality fails on ({i},{j},{k})")
    else:
        if not np.all(np.isfinite(cost)):
            return _report("negative", (), "cost matrix has non-finite entries")
        # slack[i, j, k] = c(i,j) + c(j,k) - c(i,k)
        slack = cost[:, :, None] + cost[None, :, :] - cost[:, None, :]
        scale = np.maximum(cost[:, None, :], 1.0) * METRIC_RTOL
        bad = np.argwhere(slack < -scale)
        if len(bad):
            i, j, k = (int(v) for v in bad[0])
            return _report(
                "triangle",
                (i, j, k),
                f"triangle inequality fails on ({i},{j},{k}): {cost[i, k]} > {cost[i, j]} + {cost[j, k]}",
            )
    for name, v in (("s", s), ("t", t)):
        if v is not None and not (0 <= v < n):
            return _report("endpoint", (v,), f"{name}={v} outside 0..{n - 1}")
    return MetricReport(True)


def metric_closure(matrix) -> np.ndarray:
    """All-pairs shortest-path distances (Floyd-Warshall) of a symmetric weight matrix."""
    d = np.array(matrix, dtype=float)
    n = d.shape[0]
    for k in range(n):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


# --------------------------------------------------------------------- parsing


def parse_instance(text: str, format: str = "json") -> MetricInstance:
    if format == "json":
        return _parse_json(text)
    if format == "tsplib":
        return _parse_tsplib(text)
    raise ValueError(f"unknown instance format {format!r}")


def load_instance(path: str, format: str | None = None) -> MetricInstance:
    if format is None:
        format = "json" if path.endswith(".json") else "tsplib"
    with open(path) as fh:
        inst = parse_instance(fh.read(), format)
    return inst


def _euclidean(points: np.ndarray) -> np.ndarray:
    diff = points[:, None, :] - points[None, :, :]
    return np.sqrt((diff**2).sum(axis=2))


def _parse_json(text: str) -> MetricInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(exc.msg, exc.lineno) from exc
    if not isinstance(data, dict):
        raise InstanceFormatError("top-level JSON value must be an object")
    points = None
    if "cost" in data:
        try:
            cost = np.array(data["cost"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InstanceFormatError(f"bad cost matrix: {exc}") from exc
    elif "points" in data:
        try:
            points = np.array(data["points"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InstanceFormatError(f"bad points: {exc}") from exc
        if points.ndim != 2 or points.shape[1] != 2:
            raise InstanceFormatError("points must be a list of [x, y] pairs")
        cost = _euclidean(points)
    else:
        raise InstanceFormatError("instance needs either 'cost' or 'points'")
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise InstanceFormatError(f"cost matrix must be square, got shape {cost.shape}")
    n = cost.shape[0]
    if "n" in data and data["n"] != n:
        raise InstanceFormatError(f"n={data['n']} does not match matrix size {n}")
    s = int(data.get("s", 0))
    t = int(data.get("t", n - 1))
    return MetricInstance(cost, s, t, name=str(data.get("name", "")), points=points)


def _parse_tsplib(text: str) -> MetricInstance:
    header: dict[str, str] = {}
    fixed: tuple[int, int] | None = None
    section = None
    numbers: list[float] = []
    coords: list[tuple[float, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if line in ("NODE_COORD_SECTION", "EDGE_WEIGHT_SECTION"):
            section = line
            continue
        if line.upper().startswith("FIXED_ENDPOINTS"):
            # extension: "FIXED_ENDPOINTS : s t", 0-based
            rest = line[len("FIXED_ENDPOINTS") :].lstrip(" \t:")
            try:
                a, b = (int(tok) for tok in rest.split())
            except ValueError:
                raise InstanceFormatError("FIXED_ENDPOINTS needs two vertex indices", lineno) from None
            fixed = (a, b)
            continue
        if ":" in line and section is None:
            key, value = line.split(":", 1)
            header[key.strip().upper()] = value.strip()
            continue
        if section == "NODE_COORD_SECTION":
            parts = line.split()
            if len(parts) != 3:
                raise InstanceFormatError(f"expected 'id x y', got {line!r}", lineno)
            try:
                coords.append((float(parts[1]), float(parts[2])))
            except ValueError:
                raise InstanceFormatError(f"bad coordinate in {line!r}", lineno) from None
        elif section == "EDGE_WEIGHT_SECTION":
            try:
                numbers.extend(float(tok) for tok in line.split())
            except ValueError:
                raise InstanceFormatError(f"bad edge weight in {line!r}", lineno) from None
        else:
            raise InstanceFormatError(f"unexpected line {line!r}", lineno)

    if "DIMENSION" not in header:
        raise InstanceFormatError("missing DIMENSION")
    try:
        n = int(header["DIMENSION"])
    except ValueError:
        raise InstanceFormatError(f"bad DIMENSION {header['DIMENSION']!r}") from None
    kind = header.get("EDGE_WEIGHT_TYPE", "").upper()
    points = None
    if kind == "EUC_2D":
        if len(coords) != n:
            raise InstanceFormatError(f"expected {n} coordinates, got {len(coords)}")
        points = np.array(coords, dtype=float)
        cost = _euclidean(points)
    elif kind == "EXPLICIT":
        fmt = header.get("EDGE_WEIGHT_FORMAT", "FULL_MATRIX").upper()
        if fmt != "FULL_MATRIX":
            raise InstanceFormatError(f"unsupported EDGE_WEIGHT_FORMAT {fmt}")
        if len(numbers) != n * n:
            raise InstanceFormatError(f"expected {n * n} edge weights, got {len(numbers)}")
        cost = np.array(numbers, dtype=float).reshape(n, n)
    else:
        raise InstanceFormatError(f"unsupported EDGE_WEIGHT_TYPE {kind or '<missing>'}")
    s, t = fixed if fixed is not None else (0, n - 1)
    return MetricInstance(cost, s, t, name=header.get("NAME", ""), points=points)


def serialize_instance(inst: MetricInstance) -> str:
    data = {
        "name": inst.name,
        "n": inst.n,
        "s": inst.s,
        "t": inst.t,
        "cost": [[float(v) for v in row] for row in inst.cost],
    }
    return json.dumps(data)


# ------------------------------------------------------------------ generators


def gen_random(n: int, family: str = "euclidean-unit-square", seed: int = 0) -> MetricInstance:
    """Random instance with ``s = 0`` and ``t = n - 1``; deterministic in ``(n, family, seed)``."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    name = f"{family}-n{n}-seed{seed}"
    if family == "euclidean-unit-square":
        points = rng.random((n, 2))
        return MetricInstance(_euclidean(points), 0, n - 1, name=name, points=points)
    if family == "random-metric-closure":
        w = rng.uniform(0.1, 1.0, size=(n, n))
        w = np.triu(w, 1)
        w = w + w.T
        return MetricInstance(metric_closure(w), 0, n - 1, name=name)
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
