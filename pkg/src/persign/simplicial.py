"""Filtered simplicial complexes built from point clouds and attributed graphs.

A filtered complex pairs each simplex with a vector of filtration values, one
per parameter axis, monotone under inclusion of simplices.  Constructors here
cover Vietoris-Rips complexes (possibly augmented with a vertex function on a
second axis) and lower-star multifiltrations of graphs, plus the vertex
descriptors commonly used as filtration axes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist, squareform

__all__ = [
    "PointCloud",
    "AttributedGraph",
    "FilteredComplex",
    "Descriptor",
    "ValidationReport",
    "Violation",
    "build_rips",
    "build_function_rips",
    "lower_star_multifiltration",
    "vertex_descriptor",
    "validate_complex",
]


@dataclass(frozen=True)
class PointCloud:
    """Finite set of points in Euclidean space, one row per point."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError("points must be a 2-d array (one point per row)")
        if pts.size and not np.isfinite(pts).all():
            raise ValueError("point cloud contains NaN or infinite coordinates")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class AttributedGraph:
    """Undirected graph with dense vertex ids 0..vertex_count-1 and named
    per-vertex real attributes.

    ``label_map`` optionally records how external vertex labels were mapped to
    the dense id range by a file parser.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    vertex_attributes: dict[str, np.ndarray] = field(default_factory=dict)
    label_map: dict[str, int] | None = None

    def __post_init__(self):
        if self.vertex_count < 0:
            raise ValueError("vertex_count must be >= 0")
        seen = set()
        canon = []
        for e in self.edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) references an unknown vertex")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({key[0]},{key[1]})")
            seen.add(key)
            canon.append(key)
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        attrs = {}
        for name, vals in self.vertex_attributes.items():
            arr = np.asarray(vals, dtype=np.float64)
            if arr.shape != (self.vertex_count,):
                raise ValueError(
                    f"attribute {name!r} has length {arr.shape}, expected ({self.vertex_count},)"
                )
            attrs[name] = arr
        object.__setattr__(self, "vertex_attributes", attrs)

    def degree_array(self) -> np.ndarray:
        deg = np.zeros(self.vertex_count, dtype=np.int64)
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg


@dataclass(frozen=True, eq=False)
class FilteredComplex:
    """Simplicial complex with an R^n-valued monotone filtration.

    Simplices are tuples of strictly increasing vertex ids, stored in a
    canonical order (dimension, then filtration value, then vertex order).
    ``values`` has one row per simplex with ``num_parameters`` columns.
    ``axis_kinds`` tags every axis as either ``"vertex"`` (values determined
    by vertex data, as in lower-star filtrations) or ``"diameter"`` (values
    growing with simplex size, as on the Rips axis); grid construction uses
    the tag to pick the percentile population.
    """

    num_parameters: int
    simplices: tuple[tuple[int, ...], ...]
    values: np.ndarray
    vertex_count: int
    axis_kinds: tuple[str, ...]

    @property
    def n(self) -> int:
        return self.num_parameters

    def __len__(self) -> int:
        return len(self.simplices)

    @property
    def dimensions(self) -> np.ndarray:
        return np.fromiter((len(s) - 1 for s in self.simplices), dtype=np.int64,
                           count=len(self.simplices))

    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def euler_characteristic(self) -> int:
        dims = self.dimensions
        return int(np.sum((-1) ** dims)) if len(dims) else 0

    def value_of(self, simplex: tuple[int, ...]) -> np.ndarray:
        idx = self._index().get(tuple(simplex))
        if idx is None:
            raise KeyError(f"simplex {simplex} not in complex")
        return self.values[idx]

    def _index(self) -> dict[tuple[int, ...], int]:
        cache = getattr(self, "_idx_cache", None)
        if cache is None:
            cache = {s: i for i, s in enumerate(self.simplices)}
            object.__setattr__(self, "_idx_cache", cache)
        return cache

    def vertex_values(self) -> np.ndarray:
        """Filtration values of the vertices, shape (vertex_count, n)."""
        out = np.empty((self.vertex_count, self.num_parameters))
        found = 0
        for s, row in zip(self.simplices, self.values):
            if len(s) == 1:
                out[s[0]] = row
                found += 1
        if found != self.vertex_count:
            raise ValueError("complex is missing vertex simplices")
        return out

    @classmethod
    def from_simplices(cls, entries, num_parameters, vertex_count=None,
                       axis_kinds=None) -> "FilteredComplex":
        """Build a complex from (vertices, values) pairs, canonicalizing order.

        Parameters
        ----------
        entries : iterable of (sequence of int, sequence of float)
        num_parameters : int
        vertex_count : int, optional
            Inferred as max vertex id + 1 when omitted.
        axis_kinds : sequence of str, optional
            Defaults to all-"vertex".
        """
        n = int(num_parameters)
        if n < 1:
            raise ValueError("num_parameters must be >= 1")
        rows = []
        for verts, vals in entries:
            sv = tuple(int(v) for v in verts)
            fv = tuple(float(x) for x in (vals if np.ndim(vals) else [vals]))
            if len(fv) != n:
                raise ValueError(
                    f"simplex {sv} has {len(fv)} filtration values, expected {n}"
                )
            rows.append((len(sv) - 1, fv, sv))
        rows.sort()
        simplices = tuple(r[2] for r in rows)
        if len(set(simplices)) != len(simplices):
            raise ValueError("duplicate simplices")
        values = np.array([r[1] for r in rows], dtype=np.float64
                          ).reshape(len(rows), n)
        if vertex_count is None:
            vertex_count = 1 + max((max(s) for s in simplices), default=-1)
        if axis_kinds is None:
            axis_kinds = ("vertex",) * n
        axis_kinds = tuple(axis_kinds)
        if len(axis_kinds) != n:
            raise ValueError("axis_kinds length must equal num_parameters")
        return cls(n, simplices, values, int(vertex_count), axis_kinds)


def _threshold_cliques(dist, max_edge_length, max_dim):
    """Yield (simplex, diameter) for all cliques of the threshold graph up to
    max_dim, by incremental expansion over lower neighbor sets."""
    npts = dist.shape[0]
    lower = [np.flatnonzero((dist[v, :v] <= max_edge_length)) for v in range(npts)]
    lower_sets = [set(ix.tolist()) for ix in lower]
    for v in range(npts):
        yield (v,), 0.0
    current = []
    for v in range(npts):
        for u in lower[v]:
            current.append(((int(u), int(v)), float(dist[u, v])))
    dim = 1
    while current and dim <= max_dim:
        for s, d in current:
            yield s, d
        if dim == max_dim:
            break
        nxt = []
        for s, d in current:
            common = lower_sets[s[0]]
            for v in s[1:]:
                common = common & lower_sets[v]
            for w in sorted(common):
                dw = max(d, float(dist[w, list(s)].max()))
                nxt.append(((w,) + s, dw))
        current = nxt
        dim += 1


def build_rips(cloud: PointCloud, max_edge_length: float, max_dim: int) -> FilteredComplex:
    """Vietoris-Rips complex of a point cloud (one filtration axis).

    Contains every simplex of dimension <= ``max_dim`` whose diameter (max
    pairwise Euclidean distance) is <= ``max_edge_length``; the filtration
    value of a simplex is its diameter, so vertices enter at 0.  Cliques of
    the threshold graph are enumerated by incremental expansion rather than
    by scanning all vertex subsets.
    """
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(np.asarray(cloud))
    if len(cloud) == 0:
        raise ValueError("empty input: point cloud has no points")
    if max_edge_length <= 0:
        raise ValueError("max_edge_length must be > 0")
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    dist = squareform(pdist(cloud.points)) if len(cloud) > 1 else np.zeros((1, 1))
    entries = ((s, (d,)) for s, d in _threshold_cliques(dist, max_edge_length, max_dim))
    return FilteredComplex.from_simplices(
        entries, 1, vertex_count=len(cloud), axis_kinds=("diameter",))


def build_function_rips(cloud: PointCloud, vertex_values, max_edge_length: float,
                        max_dim: int) -> FilteredComplex:
    """Function-Rips bifiltration: axis 1 is the Rips diameter, axis 2 is the
    negated minimum of a vertex function over the simplex.

    With vertex values d, a simplex {p_0..p_q} gets (diameter, -min_i d(p_i)),
    which is monotone on both axes.
    """
    if not isinstance(cloud, PointCloud):
        cloud = PointCloud(np.asarray(cloud))
    vals = np.asarray(vertex_values, dtype=np.float64).ravel()
    if vals.shape[0] != len(cloud):
        raise ValueError(
            f"vertex_values has length {vals.shape[0]}, expected {len(cloud)}")
    if len(cloud) == 0:
        raise ValueError("empty input: point cloud has no points")
    if max_edge_length <= 0:
        raise ValueError("max_edge_length must be > 0")
    dist = squareform(pdist(cloud.points)) if len(cloud) > 1 else np.zeros((1, 1))
    neg = -vals

    def entries():
        for s, d in _threshold_cliques(dist, max_edge_length, max_dim):
            yield s, (d, float(neg[list(s)].max()))

    return FilteredComplex.from_simplices(
        entries(), 2, vertex_count=len(cloud), axis_kinds=("diameter", "vertex"))


def lower_star_multifiltration(graph: AttributedGraph, attribute_names) -> FilteredComplex:
    """Lower-star multifiltration of a graph by named vertex attributes.

    Each vertex gets the vector of its attribute values; each edge gets the
    componentwise max of its endpoints, which is the smallest monotone
    extension of the vertex function.
    """
    names = list(attribute_names)
    if not names:
        raise ValueError("at least one attribute name required")
    missing = [a for a in names if a not in graph.vertex_attributes]
    if missing:
        raise ValueError(
            f"unknown attribute(s) {missing}; available: "
            f"{sorted(graph.vertex_attributes)}")
    cols = np.column_stack([graph.vertex_attributes[a] for a in names]) \
        if graph.vertex_count else np.zeros((0, len(names)))

    def entries():
        for v in range(graph.vertex_count):
            yield (v,), cols[v]
        for u, v in graph.edges:
            yield (u, v), np.maximum(cols[u], cols[v])

    return FilteredComplex.from_simplices(
        entries(), len(names), vertex_count=graph.vertex_count,
        axis_kinds=("vertex",) * len(names))


@dataclass(frozen=True)
class Descriptor:
    """One real value per vertex/point, plus metadata about the conventions
    that were applied (e.g. which closeness variant, dropped eigenvalues)."""

    values: np.ndarray
    info: dict[str, str]

    def __array__(self, dtype=None, copy=None):
        arr = np.asarray(self.values)
        return arr.astype(dtype) if dtype is not None else arr


def _graph_distances(graph: AttributedGraph) -> np.ndarray:
    nv = graph.vertex_count
    if nv == 0:
        return np.zeros((0, 0))
    rows = [u for u, v in graph.edges] + [v for u, v in graph.edges]
    cols = [v for u, v in graph.edges] + [u for u, v in graph.edges]
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(nv, nv))
    return shortest_path(adj, method="D", unweighted=True, directed=False)


def vertex_descriptor(data, kind: str, *, t: float | None = None,
                      bandwidth: float | None = None,
                      mass: float | None = None) -> Descriptor:
    """Compute a per-vertex (or per-point) descriptor.

    Parameters
    ----------
    data : AttributedGraph or PointCloud
        Graph kinds: "degree", "closeness", "hks".  Cloud kinds:
        "kde_codensity", "dtm".
    kind : str
    t : float
        Diffusion time for "hks"; must be > 0.
    bandwidth : float
        Gaussian bandwidth for "kde_codensity"; must be > 0.
    mass : float
        Neighbor fraction for "dtm"; 0 < mass <= 1.

    Returns
    -------
    Descriptor
        ``values`` holds one real per vertex/point; ``info`` records the
        conventions applied, so they travel with downstream metadata.

    Notes
    -----
    * hks(t, v) = sum_i exp(-lambda_i t) phi_i(v)^2 over eigenpairs of the
      unnormalized graph Laplacian, with numerically zero eigenvalues dropped
      (the constant eigenvector on a connected graph, the whole kernel on a
      disconnected one).
    * kde_codensity is the negated Gaussian kernel density estimate, so that
      denser regions get smaller values and enter a sublevel filtration
      earlier under the function-Rips sign convention.
    * dtm(x) is the mean Euclidean distance from x to its ceil(mass*N)
      nearest neighbors, the point itself included.
    * closeness falls back to harmonic closeness on disconnected graphs
      (reciprocal distances, unreachable pairs contributing 0); the variant
      used is reported in ``info["convention"]``.
    """
    info = {"kind": kind}
    if kind == "degree":
        _require(isinstance(data, AttributedGraph), "degree needs an AttributedGraph")
        return Descriptor(data.degree_array().astype(np.float64), info)

    if kind == "closeness":
        _require(isinstance(data, AttributedGraph), "closeness needs an AttributedGraph")
        dist = _graph_distances(data)
        nv = data.vertex_count
        if nv <= 1:
            info["convention"] = "classical"
            return Descriptor(np.zeros(nv), info)
        off = ~np.eye(nv, dtype=bool)
        disconnected = not np.isfinite(dist[off]).all()
        if disconnected:
            info["convention"] = "harmonic (graph is disconnected)"
            with np.errstate(divide="ignore"):
                inv = np.where(np.isfinite(dist) & (dist > 0), 1.0 / dist, 0.0)
            vals = inv.sum(axis=1)
        else:
            info["convention"] = "classical"
            vals = (nv - 1) / dist.sum(axis=1)
        return Descriptor(vals, info)

    if kind == "hks":
        _require(isinstance(data, AttributedGraph), "hks needs an AttributedGraph")
        _require(t is not None and t > 0, "hks needs t > 0")
        nv = data.vertex_count
        lap = np.zeros((nv, nv))
        for u, v in data.edges:
            lap[u, u] += 1
            lap[v, v] += 1
            lap[u, v] -= 1
            lap[v, u] -= 1
        if nv == 0:
            return Descriptor(np.zeros(0), info)
        eigval, eigvec = np.linalg.eigh(lap)
        tol = 1e-10 * max(1.0, float(eigval[-1]))
        keep = eigval > tol
        info["dropped_zero_eigenvalues"] = str(int(np.sum(~keep)))
        vals = (eigvec[:, keep] ** 2 * np.exp(-eigval[keep] * t)).sum(axis=1)
        return Descriptor(vals, info)

    if kind == "kde_codensity":
        _require(isinstance(data, PointCloud), "kde_codensity needs a PointCloud")
        _require(bandwidth is not None and bandwidth > 0, "kde_codensity needs bandwidth > 0")
        pts = data.points
        npts, d = pts.shape
        sq = squareform(pdist(pts, "sqeuclidean")) if npts > 1 else np.zeros((1, 1))
        norm = npts * (2 * math.pi) ** (d / 2) * bandwidth**d
        dens = np.exp(-sq / (2 * bandwidth**2)).sum(axis=1) / norm
        info["bandwidth"] = repr(float(bandwidth))
        return Descriptor(-dens, info)

    if kind == "dtm":
        _require(isinstance(data, PointCloud), "dtm needs a PointCloud")
        _require(mass is not None and 0 < mass <= 1, "dtm needs 0 < mass <= 1")
        pts = data.points
        k = math.ceil(mass * len(pts))
        tree = cKDTree(pts)
        dist, _ = tree.query(pts, k=k)
        dist = np.atleast_2d(dist.T).T  # k=1 returns a flat array
        info["neighbors"] = str(k)
        return Descriptor(dist.mean(axis=1), info)

    raise ValueError(
        f"unknown descriptor kind {kind!r}; expected degree, closeness, hks, "
        "kde_codensity, or dtm")


def _require(cond: bool, msg: str):
    if not cond:
        raise ValueError(msg)


@dataclass(frozen=True)
class Violation:
    kind: str
    simplex: tuple[int, ...]
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        lines = [f"{len(self.violations)} violation(s):"]
        lines += [f"  [{v.kind}] {v.simplex}: {v.detail}" for v in self.violations]
        return "\n".join(lines)


def validate_complex(c: FilteredComplex) -> ValidationReport:
    """Check canonical form, face closure, and filtration monotonicity.

    Face closure is verified on facets only (codimension 1), which implies
    closure for all proper subsets by induction; monotonicity likewise only
    needs checking against facets.
    """
    out = []
    index = {}
    for i, s in enumerate(c.simplices):
        if len(s) == 0:
            out.append(Violation("form", s, "empty simplex"))
            continue
        if any(b <= a for a, b in zip(s, s[1:])) or s[0] < 0:
            out.append(Violation("form", s, "vertices not strictly increasing and non-negative"))
            continue
        if s in index:
            out.append(Violation("duplicate", s, "listed more than once"))
        index[s] = i
    for s, i in index.items():
        row = c.values[i]
        if row.shape[0] != c.num_parameters or not np.isfinite(row).all():
            out.append(Violation("value", s, f"bad filtration value {row}"))
            continue
        if len(s) == 1:
            continue
        for q in range(len(s)):
            face = s[:q] + s[q + 1:]
            j = index.get(face)
            if j is None:
                out.append(Violation("face-closure", s, f"missing face {face}"))
                continue
            bad = np.flatnonzero(c.values[j] > row)
            for ax in bad:
                out.append(Violation(
                    "monotonicity", s,
                    f"value below face {face} on axis {ax}: "
                    f"{row[ax]} < {c.values[j][ax]}"))
    return ValidationReport(tuple(out))
