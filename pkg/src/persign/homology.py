"""Persistence of multifiltered complexes: barcodes of one-parameter fibers
and the Hilbert function on a finite grid.

The Hilbert function of a module with n parameters is assembled from k^(n-1)
one-parameter reductions: each fiber fixes grid thresholds on all axes but
one, restricts the complex to simplices passing those thresholds, and sweeps
the remaining axis.  Every array gets an extra padding slot per axis (index k)
where the restricted module is forced to zero, which later gives signed
measures total mass zero.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _reduction
from .simplicial import FilteredComplex

__all__ = [
    "FieldSpec",
    "Barcode",
    "GridSpec",
    "HilbertFunction",
    "make_grid",
    "fiber_barcode",
    "hilbert_function",
]


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class FieldSpec:
    """Prime field Z/pZ for homology coefficients."""

    p: int = 11

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"field modulus {self.p} is not prime")
        if self.p >= 2**31:
            raise ValueError("field modulus too large for exact int64 arithmetic")

    def inverse_table(self) -> np.ndarray:
        """inv[a] = a^-1 mod p for 1 <= a < p (inv[0] unused)."""
        inv = np.zeros(self.p, dtype=np.int64)
        for a in range(1, self.p):
            inv[a] = pow(a, self.p - 2, self.p)
        return inv


@dataclass(frozen=True)
class Barcode:
    """Intervals [birth, death) of a one-parameter persistence module in a
    single homology degree; death may be +inf, zero-length bars are dropped."""

    degree: int
    bars: tuple[tuple[float, float], ...]

    def __post_init__(self):
        bars = tuple(sorted((float(b), float(d)) for b, d in self.bars))
        for b, d in bars:
            if not b < d:
                raise ValueError(f"bar [{b}, {d}) is empty or reversed")
        object.__setattr__(self, "bars", bars)

    def __len__(self) -> int:
        return len(self.bars)

    def count_at(self, x: float) -> int:
        """Number of bars [b, d) with b <= x < d."""
        return sum(1 for b, d in self.bars if b <= x < d)


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Evaluation grid: per axis, k regular values followed by one padding
    value, strictly increasing.

    Grids built by :func:`make_grid` place the regular values uniformly
    between two percentiles of the filtration values and the padding value at
    1.1 times the regular span beyond the first value.  ``info`` records how
    each axis was derived.
    """

    axes: tuple[np.ndarray, ...]
    resolution: int
    beta: float
    info: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        axes = tuple(np.asarray(a, dtype=np.float64) for a in self.axes)
        for j, ax in enumerate(axes):
            if ax.ndim != 1 or ax.shape[0] != self.resolution + 1:
                raise ValueError(
                    f"axis {j} must hold resolution+1 = {self.resolution + 1} values")
            if not np.all(np.diff(ax) > 0):
                raise ValueError(f"axis {j} values must be strictly increasing")
        object.__setattr__(self, "axes", axes)

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(ax) for ax in self.axes)

    def spacing(self) -> np.ndarray:
        """Per-axis spacing of the regular (non-padding) values."""
        k = self.resolution
        return np.array([(ax[k - 1] - ax[0]) / max(k - 1, 1) for ax in self.axes])

    def points(self) -> np.ndarray:
        """All grid points (padding included), shape (prod(shape), n),
        row-major in the axis order."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def rescale(self, scales) -> "GridSpec":
        s = np.asarray(scales, dtype=np.float64).ravel()
        if s.shape[0] != self.n or np.any(s <= 0):
            raise ValueError("need one positive scale per axis")
        axes = tuple(ax * c for ax, c in zip(self.axes, s))
        return GridSpec(axes, self.resolution, self.beta, dict(self.info))

    @classmethod
    def regular(cls, lows, highs, count: int) -> "GridSpec":
        """Uniform standalone grid (the last value doubles as the padding
        slot); used for quadrature checks independent of any complex."""
        lows = np.atleast_1d(np.asarray(lows, dtype=np.float64))
        highs = np.atleast_1d(np.asarray(highs, dtype=np.float64))
        axes = tuple(np.linspace(lo, hi, count) for lo, hi in zip(lows, highs))
        return cls(axes, count - 1, 0.0, {"source": "regular"})


@dataclass(frozen=True, eq=False)
class HilbertFunction:
    """Per-degree integer arrays of shape grid.shape holding dim H_i at each
    grid point; padding slices (index k on any axis) are identically zero."""

    grid: GridSpec
    degrees: dict[int, np.ndarray]

    def __post_init__(self):
        shape = self.grid.shape
        k = self.grid.resolution
        for i, arr in self.degrees.items():
            if arr.shape != shape:
                raise ValueError(f"degree {i} array has shape {arr.shape}, expected {shape}")
            if arr.dtype.kind not in "iu":
                raise ValueError("Hilbert entries must be integers")
            if (arr < 0).any():
                raise ValueError(f"degree {i} has negative entries")
            for ax in range(len(shape)):
                sl = [slice(None)] * len(shape)
                sl[ax] = k
                if arr[tuple(sl)].any():
                    raise ValueError(f"degree {i} is nonzero on the padding slice of axis {ax}")

    def degree_array(self, i: int) -> np.ndarray:
        if i not in self.degrees:
            raise ValueError(f"degree {i} absent; have {sorted(self.degrees)}")
        return self.degrees[i]


def make_grid(c: FilteredComplex, k: int, beta: float) -> GridSpec:
    """Build the evaluation grid of a complex.

    Per axis, k uniform values span the beta and 1-beta percentiles (linear
    interpolation between order statistics) of the filtration values, plus a
    padding value at 1.1 times the span beyond the low end.  Percentiles are
    taken over vertex values for "vertex" axes and over all simplices for
    "diameter" axes, where vertices sit at a constant 0 and would clip away
    every edge.  A degenerate axis (all values equal) widens to a synthetic
    span of width 1 centered at the common value.
    """
    if k < 2:
        raise ValueError("grid resolution k must be >= 2")
    if not (0 <= beta < 0.5):
        raise ValueError("beta must satisfy 0 <= beta < 0.5")
    if c.vertex_count < 1:
        raise ValueError("complex must have at least one vertex")
    vv = c.vertex_values()
    axes = []
    info = {}
    for j in range(c.num_parameters):
        if c.axis_kinds[j] == "diameter":
            pop = c.values[:, j]
            info[f"axis{j}_percentiles"] = "all simplices (diameter axis)"
        else:
            pop = vv[:, j]
            info[f"axis{j}_percentiles"] = "vertices"
        lo = float(np.percentile(pop, 100.0 * beta))
        hi = float(np.percentile(pop, 100.0 * (1.0 - beta)))
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
            info[f"axis{j}_degenerate"] = "constant values, synthetic width-1 span"
        base = np.linspace(lo, hi, k)
        pad = 1.1 * (base[-1] - base[0]) + base[0]
        axes.append(np.append(base, pad))
    return GridSpec(tuple(axes), k, float(beta), info)


class _ComplexArrays:
    """Flattened simplex/boundary arrays in (dimension, lexicographic) base
    order, the layout the reduction kernel expects."""

    def __init__(self, c: FilteredComplex):
        m = len(c.simplices)
        order = sorted(range(m), key=lambda i: (len(c.simplices[i]), c.simplices[i]))
        self.simplices = [c.simplices[i] for i in order]
        self.vals = np.ascontiguousarray(c.values[order])
        self.dims = np.array([len(s) - 1 for s in self.simplices], dtype=np.int8)
        index = {s: i for i, s in enumerate(self.simplices)}
        ptr = [0]
        idx = []
        sgn = []
        for s in self.simplices:
            if len(s) > 1:
                for q in range(len(s)):
                    face = s[:q] + s[q + 1:]
                    idx.append(index[face])
                    sgn.append(1 if q % 2 == 0 else -1)
            ptr.append(len(idx))
        self.facet_ptr = np.array(ptr, dtype=np.int64)
        self.facet_idx = np.array(idx, dtype=np.int64)
        self.facet_sgn = np.array(sgn, dtype=np.int8)


def _complex_arrays(c: FilteredComplex) -> _ComplexArrays:
    cached = getattr(c, "_arrays_cache", None)
    if cached is None:
        cached = _ComplexArrays(c)
        object.__setattr__(c, "_arrays_cache", cached)
    return cached


def _run_fiber(arrays: _ComplexArrays, thr: np.ndarray, sweep: int,
               max_dim: int, fs: FieldSpec):
    return _reduction.fiber_pairs(
        arrays.vals, arrays.dims, arrays.facet_ptr, arrays.facet_idx,
        arrays.facet_sgn, thr, sweep, max_dim, fs.p, fs.inverse_table())


def _bars_of_degree(entry, ldims, is_zero, pair, degree):
    mask = (ldims == degree) & (is_zero == 1)
    births = entry[mask]
    pr = pair[mask]
    deaths = np.where(pr >= 0, entry[np.clip(pr, 0, None)], np.inf)
    alive = births < deaths
    return births[alive], deaths[alive]


def fiber_barcode(c: FilteredComplex, fiber, degree: int, grid: GridSpec | None = None,
                  field: FieldSpec = FieldSpec()) -> Barcode:
    """Barcode of one grid fiber in a single homology degree.

    The fiber is given by n-1 grid indices on the leading axes; a simplex
    belongs to the fiber when its value on axis j is <= the grid value at the
    j-th fiber index, and it enters at its last-axis value.  For n=1 the
    fiber is empty and no grid is needed.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    n = c.num_parameters
    fiber = tuple(int(a) for a in fiber)
    if len(fiber) != n - 1:
        raise ValueError(f"fiber needs {n - 1} indices, got {len(fiber)}")
    thr = np.full(n, np.inf)
    if n > 1:
        if grid is None:
            raise ValueError("a grid is required for n >= 2")
        for j, a in enumerate(fiber):
            if not (0 <= a < grid.resolution + 1):
                raise ValueError(f"fiber index {a} outside grid on axis {j}")
            thr[j] = grid.axes[j][a]
    arrays = _complex_arrays(c)
    sel, entry, ldims, is_zero, pair = _run_fiber(arrays, thr, n - 1, degree + 1, field)
    births, deaths = _bars_of_degree(entry, ldims, is_zero, pair, degree)
    return Barcode(degree, tuple(zip(births.tolist(), deaths.tolist())))


def hilbert_function(c: FilteredComplex, degrees, grid: GridSpec,
                     field: FieldSpec = FieldSpec(), threads: int = 1,
                     sweep_axis: int | None = None) -> HilbertFunction:
    """Hilbert function of the complex's homology on the grid.

    For each homology degree i and each grid point x with no padding index,
    entry = dim H_i of the sublevel complex at x, computed by sweeping
    one-parameter fibers along ``sweep_axis`` (default: the last axis; any
    choice yields the same array).  Padding entries stay 0.  Fibers are
    independent and run on ``threads`` worker threads.
    """
    degs = sorted({int(d) for d in degrees})
    if not degs or degs[0] < 0:
        raise ValueError("degrees must be a non-empty set of non-negative integers")
    n = c.num_parameters
    if grid.n != n:
        raise ValueError(f"grid has {grid.n} axes, complex has {n}")
    sweep = n - 1 if sweep_axis is None else int(sweep_axis)
    if not (0 <= sweep < n):
        raise ValueError("sweep_axis out of range")
    k = grid.resolution
    arrays = _complex_arrays(c)
    max_dim = degs[-1] + 1
    out = {i: np.zeros(grid.shape, dtype=np.int64) for i in degs}
    other_axes = [j for j in range(n) if j != sweep]
    sweep_vals = grid.axes[sweep][:k]
    fibers = list(itertools.product(*(range(k) for _ in other_axes)))

    def work(fib):
        thr = np.full(n, np.inf)
        for j, a in zip(other_axes, fib):
            thr[j] = grid.axes[j][a]
        sel, entry, ldims, is_zero, pair = _run_fiber(arrays, thr, sweep, max_dim, field)
        counts = {}
        for i in degs:
            births, deaths = _bars_of_degree(entry, ldims, is_zero, pair, i)
            counts[i] = (np.searchsorted(np.sort(births), sweep_vals, "right")
                         - np.searchsorted(np.sort(deaths), sweep_vals, "right"))
        return fib, counts

    def store(fib, counts):
        idx: list = [None] * n
        for j, a in zip(other_axes, fib):
            idx[j] = a
        idx[sweep] = slice(0, k)
        for i in degs:
            out[i][tuple(idx)] = counts[i]

    if threads > 1 and len(fibers) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            for fib, counts in ex.map(work, fibers):
                store(fib, counts)
    else:
        for fib in fibers:
            store(*work(fib))
    return HilbertFunction(grid, out)
