"""Problem data for the latency location routing problem.

Vertices are re-indexed densely with depots first: depot ``k`` is vertex
``k`` and customer ``j`` is vertex ``n_depots + j``. External ids from the
input file are kept in :attr:`Instance.depot_ids` / :attr:`Instance.customer_ids`
and only used for I/O.
"""
from __future__ import annotations

import csv
import logging
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_DELTA = 20
RAW_FORMATS = ("prodhon", "tuzun", "barreto")
FORMATS = ("canonical",) + RAW_FORMATS


class InstanceError(ValueError):
    """Base class for instance loading problems."""


class InstanceParseError(InstanceError):
    def __init__(self, message, line=None, column=None, path=None):
        self.line = line
        self.column = column
        self.path = path
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class InstanceValidationError(InstanceError):
    def __init__(self, invariant, message):
        self.invariant = invariant
        super().__init__(f"[{invariant}] {message}")


class UnknownInstanceMetadata(InstanceError):
    """Raised when a raw benchmark file has no fleet/depot metadata."""


class TriangleInequalityWarning(UserWarning):
    pass


def euclidean_matrix(xy):
    xy = np.asarray(xy, dtype=float)
    diff = xy[:, None, :] - xy[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def build_neighbor_lists(dist, n_depots, delta):
    """Return, for every customer, its ``delta`` nearest other vertices.

    ``dist`` is the full vertex distance matrix (depots first). Lists are
    sorted by distance with ties broken by vertex index, and ``delta`` is
    clamped to ``|V| - 1``.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    dist = np.asarray(dist, dtype=float)
    n = dist.shape[0]
    k = min(int(delta), n - 1)
    idx = np.arange(n)
    lists = []
    for v in range(n_depots, n):
        order = np.lexsort((idx, dist[v]))
        order = order[order != v]
        lists.append(tuple(int(u) for u in order[:k]))
    return tuple(lists)


@dataclass(frozen=True, eq=False)
class Instance:
    """Immutable LLRP instance.

    Parameters
    ----------
    name : str
    depot_xy, customer_xy : array-like of shape (n, 2)
    demands : array-like of shape (n_customers,)
    capacity : float
        Vehicle capacity ``P``.
    n_vehicles : int
        Fleet size ``N_v``; solutions use exactly this many routes.
    max_open_depots : int
        ``N_d``; solutions open exactly this many depots.
    """

    name: str
    depot_xy: np.ndarray
    customer_xy: np.ndarray
    demands: np.ndarray
    capacity: float
    n_vehicles: int
    max_open_depots: int
    depot_ids: tuple = None
    customer_ids: tuple = None
    delta: int = DEFAULT_DELTA
    dist: np.ndarray = field(init=False, repr=False)
    neighbors: tuple = field(init=False, repr=False)

    def __post_init__(self):
        set_ = object.__setattr__
        depot_xy = np.array(self.depot_xy, dtype=float).reshape(-1, 2)
        customer_xy = np.array(self.customer_xy, dtype=float).reshape(-1, 2)
        demands = np.array(self.demands, dtype=float).reshape(-1)
        for arr in (depot_xy, customer_xy, demands):
            arr.setflags(write=False)
        set_(self, "depot_xy", depot_xy)
        set_(self, "customer_xy", customer_xy)
        set_(self, "demands", demands)
        set_(self, "capacity", float(self.capacity))
        set_(self, "n_vehicles", int(self.n_vehicles))
        set_(self, "max_open_depots", int(self.max_open_depots))
        if self.depot_ids is None:
            set_(self, "depot_ids", tuple(range(1, len(depot_xy) + 1)))
        else:
            set_(self, "depot_ids", tuple(int(i) for i in self.depot_ids))
        if self.customer_ids is None:
            set_(self, "customer_ids", tuple(range(1, len(customer_xy) + 1)))
        else:
            set_(self, "customer_ids", tuple(int(i) for i in self.customer_ids))
        self._validate_shapes()

        dist = euclidean_matrix(np.vstack([depot_xy, customer_xy]))
        dist.setflags(write=False)
        set_(self, "dist", dist)
        set_(self, "neighbors", build_neighbor_lists(dist, self.n_depots, self.delta))
        # plain-list copies for the hot loops; numpy scalar access is slow
        set_(self, "d", dist.tolist())
        set_(self, "demand_of", [0.0] * self.n_depots + demands.tolist())
        neighbor_of = [()] * self.n_depots + list(self.neighbors)
        set_(self, "neighbor_of", neighbor_of)
        set_(self, "neighbor_sets", [frozenset(nb) for nb in neighbor_of])
        self._check_triangle()

    def _validate_shapes(self):
        nd, nc = len(self.depot_xy), len(self.customer_xy)
        if nd < 1:
            raise InstanceValidationError("depots", "instance needs at least one depot")
        if nc < 1:
            raise InstanceValidationError("customers", "instance needs at least one customer")
        if len(self.demands) != nc:
            raise InstanceValidationError("demands", f"{len(self.demands)} demands for {nc} customers")
        if len(self.depot_ids) != nd or len(set(self.depot_ids)) != nd:
            raise InstanceValidationError("depot_ids", "depot ids must be unique, one per depot")
        if len(self.customer_ids) != nc or len(set(self.customer_ids)) != nc:
            raise InstanceValidationError("customer_ids", "customer ids must be unique, one per customer")
        if not np.all(np.isfinite(self.depot_xy)) or not np.all(np.isfinite(self.customer_xy)):
            raise InstanceValidationError("coordinates", "coordinates must be finite")
        if self.capacity <= 0:
            raise InstanceValidationError("capacity", "capacity P must be positive")
        if self.n_vehicles < 1:
            raise InstanceValidationError("fleet_size", "N_v must be >= 1")
        if not 1 <= self.max_open_depots <= nd:
            raise InstanceValidationError(
                "max_open_depots", f"N_d={self.max_open_depots} must lie in [1, {nd}]")
        if np.any(self.demands < 0):
            raise InstanceValidationError("demand", "demands must be nonnegative")
        too_big = np.flatnonzero(self.demands > self.capacity)
        if too_big.size:
            cid = self.customer_ids[int(too_big[0])]
            raise InstanceValidationError(
                "demand<=capacity",
                f"customer {cid} has demand {self.demands[too_big[0]]:g} > capacity {self.capacity:g}")
        if self.delta < 1:
            raise InstanceValidationError("delta", "delta must be >= 1")

    def _check_triangle(self, tol=1e-9):
        dist = self.dist
        for k in range(dist.shape[0]):
            via = dist[:, k][:, None] + dist[k, :][None, :]
            if np.any(dist > via + tol):
                warnings.warn(f"instance {self.name}: distances violate the triangle inequality",
                              TriangleInequalityWarning, stacklevel=3)
                return

    @property
    def n_depots(self):
        return len(self.depot_xy)

    @property
    def n_customers(self):
        return len(self.customer_xy)

    @property
    def n_vertices(self):
        return self.n_depots + self.n_customers

    @property
    def customers(self):
        return range(self.n_depots, self.n_vertices)

    @property
    def depots(self):
        return range(self.n_depots)

    @property
    def total_demand(self):
        return float(self.demands.sum())

    def is_depot(self, v):
        return v < self.n_depots

    def external_id(self, v):
        if v < self.n_depots:
            return self.depot_ids[v]
        return self.customer_ids[v - self.n_depots]

    def depot_index(self, ext_id):
        try:
            return self.depot_ids.index(int(ext_id))
        except ValueError:
            raise KeyError(f"unknown depot id {ext_id}") from None

    def customer_index(self, ext_id):
        try:
            return self.customer_ids.index(int(ext_id)) + self.n_depots
        except ValueError:
            raise KeyError(f"unknown customer id {ext_id}") from None

    def with_delta(self, delta):
        """Copy of this instance with candidate lists rebuilt for ``delta``."""
        if delta == self.delta:
            return self
        return Instance(self.name, self.depot_xy, self.customer_xy, self.demands, self.capacity,
                        self.n_vehicles, self.max_open_depots, self.depot_ids,
                        self.customer_ids, delta)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.name == other.name
                and np.array_equal(self.depot_xy, other.depot_xy)
                and np.array_equal(self.customer_xy, other.customer_xy)
                and np.array_equal(self.demands, other.demands)
                and self.capacity == other.capacity
                and self.n_vehicles == other.n_vehicles
                and self.max_open_depots == other.max_open_depots
                and self.depot_ids == other.depot_ids
                and self.customer_ids == other.customer_ids
                and self.neighbors == other.neighbors)

    __hash__ = object.__hash__


# ---------------------------------------------------------------------------
# canonical text format


def _canonical_lines(text):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, raw, line


def _to_num(tok, kind, lineno, raw, path):
    try:
        return kind(tok)
    except ValueError:
        col = raw.find(tok) + 1 if tok in raw else None
        raise InstanceParseError(f"expected {kind.__name__}, got {tok!r}", lineno, col, path) from None


def parse_canonical(text, delta=DEFAULT_DELTA, path=None):
    header = {}
    depots, customers = [], []
    lines = iter(_canonical_lines(text))
    saw_eof = False
    for lineno, raw, line in lines:
        parts = line.split()
        key = parts[0].upper()
        if key == "EOF":
            saw_eof = True
            break
        if key in ("NAME", "VEHICLES", "MAX_DEPOTS", "CAPACITY"):
            if len(parts) != 2:
                raise InstanceParseError(f"{key} takes exactly one value", lineno, 1, path)
            header[key] = parts[1]
            continue
        if key in ("DEPOTS", "CUSTOMERS"):
            if len(parts) != 2:
                raise InstanceParseError(f"{key} takes a count", lineno, 1, path)
            count = _to_num(parts[1], int, lineno, raw, path)
            width = 3 if key == "DEPOTS" else 4
            rows = depots if key == "DEPOTS" else customers
            for _ in range(count):
                try:
                    lineno, raw, line = next(lines)
                except StopIteration:
                    raise InstanceParseError(f"{key} section ends early", lineno, None, path) from None
                toks = line.split()
                if len(toks) != width:
                    raise InstanceParseError(
                        f"{key} row needs {width} fields, got {len(toks)}", lineno, 1, path)
                rows.append([_to_num(toks[0], int, lineno, raw, path)]
                            + [_to_num(t, float, lineno, raw, path) for t in toks[1:]])
            continue
        raise InstanceParseError(f"unknown keyword {parts[0]!r}", lineno, raw.find(parts[0]) + 1, path)
    if not saw_eof:
        raise InstanceParseError("missing EOF", None, None, path)
    for key in ("NAME", "VEHICLES", "MAX_DEPOTS", "CAPACITY"):
        if key not in header:
            raise InstanceParseError(f"missing {key} header", None, None, path)
    if not depots:
        raise InstanceParseError("missing DEPOTS section", None, None, path)
    if not customers:
        raise InstanceParseError("missing CUSTOMERS section", None, None, path)

    def header_num(key, kind):
        try:
            return kind(header[key])
        except ValueError:
            raise InstanceParseError(f"{key} must be {kind.__name__}", None, None, path) from None

    return Instance(
        name=header["NAME"],
        depot_xy=[row[1:3] for row in depots],
        customer_xy=[row[1:3] for row in customers],
        demands=[row[3] for row in customers],
        capacity=header_num("CAPACITY", float),
        n_vehicles=header_num("VEHICLES", int),
        max_open_depots=header_num("MAX_DEPOTS", int),
        depot_ids=[row[0] for row in depots],
        customer_ids=[row[0] for row in customers],
        delta=delta,
    )


def write_canonical(inst, path=None):
    """Serialize ``inst`` in the canonical format; returns the text."""
    out = [f"NAME {inst.name}",
           f"VEHICLES {inst.n_vehicles}",
           f"MAX_DEPOTS {inst.max_open_depots}",
           f"CAPACITY {inst.capacity!r}",
           f"DEPOTS {inst.n_depots}"]
    for i, (x, y) in zip(inst.depot_ids, inst.depot_xy.tolist()):
        out.append(f"{i} {x!r} {y!r}")
    out.append(f"CUSTOMERS {inst.n_customers}")
    for i, (x, y), q in zip(inst.customer_ids, inst.customer_xy.tolist(), inst.demands.tolist()):
        out.append(f"{i} {x!r} {y!r} {q!r}")
    out.append("EOF")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# ---------------------------------------------------------------------------
# raw benchmark files


def parse_raw(text, n_vehicles, max_open_depots, name, delta=DEFAULT_DELTA, path=None):
    """Parse a whitespace-separated LRP benchmark file.

    Layout: ``n_customers``, ``n_depots``, depot coordinates, customer
    coordinates, vehicle capacity, depot capacities, customer demands, then
    opening costs which are ignored here.
    """
    tokens = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        for tok in raw.split():
            tokens.append((tok, lineno, raw))
    pos = 0

    def take(kind):
        nonlocal pos
        if pos >= len(tokens):
            raise InstanceParseError("unexpected end of file", None, None, path)
        tok, lineno, raw = tokens[pos]
        pos += 1
        if kind is int:
            val = _to_num(tok, float, lineno, raw, path)
            if val != int(val):
                raise InstanceParseError(f"expected integer, got {tok!r}", lineno, raw.find(tok) + 1, path)
            return int(val)
        return _to_num(tok, kind, lineno, raw, path)

    nc = take(int)
    nd = take(int)
    depot_xy = [(take(float), take(float)) for _ in range(nd)]
    customer_xy = [(take(float), take(float)) for _ in range(nc)]
    capacity = take(float)
    for _ in range(nd):
        take(float)  # depot capacities: uncapacitated depots in the LLRP
    demands = [take(float) for _ in range(nc)]
    return Instance(name, depot_xy, customer_xy, demands, capacity, n_vehicles,
                    max_open_depots, delta=delta)


@dataclass(frozen=True)
class ManifestRow:
    name: str
    path: str
    format: str
    n_customers: int
    n_depots: int
    n_vehicles: int
    max_open_depots: int
    bks: float | None = None


MANIFEST_COLUMNS = ("name", "path", "format", "n_customers", "n_depots", "n_vehicles",
                    "max_open_depots", "bks")


def read_manifest(path):
    """Read a benchmark manifest CSV; relative paths resolve against its folder."""
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        missing = set(MANIFEST_COLUMNS[:-1]) - set(reader.fieldnames or ())
        if missing:
            raise InstanceParseError(f"manifest lacks columns {sorted(missing)}", 1, None, path)
        for lineno, rec in enumerate(reader, 2):
            try:
                bks = rec.get("bks") or ""
                row = ManifestRow(
                    name=rec["name"].strip(),
                    path=str((path.parent / rec["path"].strip()).resolve())
                    if not os.path.isabs(rec["path"].strip()) else rec["path"].strip(),
                    format=rec["format"].strip().lower(),
                    n_customers=int(rec["n_customers"]),
                    n_depots=int(rec["n_depots"]),
                    n_vehicles=int(rec["n_vehicles"]),
                    max_open_depots=int(rec["max_open_depots"]),
                    bks=float(bks) if bks.strip() else None,
                )
            except (ValueError, AttributeError) as exc:
                raise InstanceParseError(f"bad manifest row: {exc}", lineno, None, path) from None
            if row.format not in FORMATS:
                raise InstanceParseError(f"unknown format {row.format!r}", lineno, None, path)
            rows.append(row)
    return rows


def _lookup_metadata(path, manifest):
    if manifest is None:
        return None
    rows = manifest if isinstance(manifest, (list, tuple)) else read_manifest(manifest)
    target = Path(path).resolve()
    stem = Path(path).stem
    for row in rows:
        if Path(row.path).resolve() == target or row.name == stem:
            return row
    return None


def parse_instance(path, format="canonical", *, delta=DEFAULT_DELTA, n_vehicles=None,
                   max_open_depots=None, name=None, manifest=None):
    """Load an instance file.

    Raw benchmark formats carry no fleet information, so ``n_vehicles`` and
    ``max_open_depots`` must come either from the keyword arguments or from a
    manifest row matching the file.
    """
    path = Path(path)
    fmt = format.lower()
    if fmt not in FORMATS:
        raise ValueError(f"unknown instance format {format!r}; expected one of {FORMATS}")
    text = path.read_text()
    if fmt == "canonical":
        return parse_canonical(text, delta=delta, path=path)
    row = _lookup_metadata(path, manifest)
    if row is not None:
        n_vehicles = n_vehicles if n_vehicles is not None else row.n_vehicles
        max_open_depots = max_open_depots if max_open_depots is not None else row.max_open_depots
        name = name or row.name
    if n_vehicles is None or max_open_depots is None:
        raise UnknownInstanceMetadata(
            f"{path}: N_v/N_d unknown for raw {fmt} file; pass them or supply a manifest row")
    inst = parse_raw(text, n_vehicles, max_open_depots, name or path.stem, delta=delta, path=path)
    if row is not None and (inst.n_customers != row.n_customers or inst.n_depots != row.n_depots):
        raise InstanceValidationError(
            "manifest", f"{path}: file has {inst.n_customers} customers/{inst.n_depots} depots, "
                        f"manifest says {row.n_customers}/{row.n_depots}")
    return inst


def random_instance(rng, n_customers, n_depots, n_vehicles=None, max_open_depots=None,
                    capacity=None, delta=DEFAULT_DELTA, name=None, grid=100.0):
    """Uniform random instance, mainly for tests and smoke runs."""
    rng = np.random.default_rng(rng)
    depot_xy = rng.uniform(0, grid, size=(n_depots, 2)).round(2)
    customer_xy = rng.uniform(0, grid, size=(n_customers, 2)).round(2)
    demands = rng.integers(1, 21, size=n_customers).astype(float)
    if n_vehicles is None:
        n_vehicles = int(rng.integers(1, min(3, n_customers) + 1))
    if max_open_depots is None:
        max_open_depots = int(rng.integers(1, n_depots + 1))
    if capacity is None:
        capacity = max(float(demands.max()), float(np.ceil(demands.sum() / n_vehicles * 1.25)))
    return Instance(name or f"rand-{n_customers}-{n_depots}", depot_xy, customer_xy, demands,
                    capacity, n_vehicles, max_open_depots, delta=delta)
