"""Signed point measures extracted from Hilbert functions and from the Euler
characteristic of a filtered complex.

A signed measure is a finite list of (point, nonzero integer weight) atoms.
The measure of a module's Hilbert function is the unique one whose down-set
cumulative reproduces the dimension at every grid point; it falls out of the
padded dimension array by an n-dimensional alternating finite difference
(Mobius inversion), and the padding slice forces total mass zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .homology import Barcode, GridSpec, HilbertFunction
from .simplicial import FilteredComplex

__all__ = [
    "SignedMeasure",
    "hilbert_signed_measure",
    "euler_signed_measure",
    "cumulative_at",
    "barcode_to_signed_measure",
    "drop_padding",
]


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Atoms (point in R^n, nonzero integer weight), coalesced and sorted
    lexicographically by coordinates."""

    dim: int
    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64).reshape(-1, self.dim)
        w = np.asarray(self.weights, dtype=np.int64).ravel()
        if pts.shape[0] != w.shape[0]:
            raise ValueError("points and weights must have matching length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.shape[0]

    @property
    def total_mass(self) -> int:
        return int(self.weights.sum())

    @property
    def total_variation(self) -> int:
        return int(np.abs(self.weights).sum())

    @classmethod
    def from_atoms(cls, points, weights, dim: int | None = None) -> "SignedMeasure":
        """Coalesce coincident points, drop zero weights, sort lexicographically."""
        pts = np.asarray(points, dtype=np.float64)
        shapeless = pts.ndim == 1 and pts.shape[0] == 0
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if dim is None:
            if shapeless:
                raise ValueError("dim required for an empty atom list")
            dim = pts.shape[1]
        pts = pts.reshape(-1, dim)
        w = np.asarray(weights).ravel()
        if w.size and not np.all(w == np.floor(w)):
            raise ValueError("atom weights must be integers")
        w = w.astype(np.int64)
        if pts.shape[0] != w.shape[0]:
            raise ValueError("points and weights must have matching length")
        pts = pts + 0.0  # normalize -0.0
        if pts.shape[0] == 0:
            return cls(dim, pts, w)
        uniq, inverse = np.unique(pts, axis=0, return_inverse=True)
        sums = np.bincount(inverse.ravel(), weights=w.astype(np.float64),
                           minlength=uniq.shape[0]).astype(np.int64)
        keep = sums != 0
        return cls(dim, uniq[keep], sums[keep])

    def __sub__(self, other: "SignedMeasure") -> "SignedMeasure":
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return SignedMeasure.from_atoms(
            np.vstack([self.points, other.points]),
            np.concatenate([self.weights, -other.weights]), dim=self.dim)

    def __add__(self, other: "SignedMeasure") -> "SignedMeasure":
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return SignedMeasure.from_atoms(
            np.vstack([self.points, other.points]),
            np.concatenate([self.weights, other.weights]), dim=self.dim)

    def __neg__(self) -> "SignedMeasure":
        return SignedMeasure(self.dim, self.points.copy(), -self.weights)

    def same_atoms(self, other: "SignedMeasure") -> bool:
        """Exact atom-for-atom equality (both sides canonical)."""
        return (self.dim == other.dim
                and self.points.shape == other.points.shape
                and np.array_equal(self.points, other.points)
                and np.array_equal(self.weights, other.weights))

    def to_dict(self) -> dict:
        atoms = [[*map(float, p), int(w)] for p, w in zip(self.points, self.weights)]
        return {"n": self.dim, "atoms": atoms}

    @classmethod
    def from_dict(cls, doc: dict) -> "SignedMeasure":
        n = int(doc["n"])
        atoms = doc.get("atoms", [])
        if not atoms:
            return cls(n, np.zeros((0, n)), np.zeros(0, dtype=np.int64))
        pts = np.array([row[:-1] for row in atoms], dtype=np.float64)
        w = np.array([row[-1] for row in atoms], dtype=np.int64)
        return cls.from_atoms(pts, w, dim=n)


def hilbert_signed_measure(h: HilbertFunction, degree: int) -> SignedMeasure:
    """Signed measure of one degree of a Hilbert function.

    The weight at grid point x is the alternating sum of the dimension array
    over the unit hypercube below x (out-of-grid entries read 0), i.e. the
    n-dimensional first difference; cumulating the result back over down-sets
    reproduces the array exactly.  Computed over the padded array, so the
    total mass is 0.
    """
    arr = h.degree_array(degree)
    w = arr.astype(np.int64)
    for ax in range(arr.ndim):
        w = np.diff(w, axis=ax, prepend=0)
    idx = np.argwhere(w != 0)
    if idx.size == 0:
        return SignedMeasure(h.grid.n, np.zeros((0, h.grid.n)), np.zeros(0, np.int64))
    pts = np.column_stack([h.grid.axes[j][idx[:, j]] for j in range(h.grid.n)])
    mu = SignedMeasure.from_atoms(pts, w[tuple(idx.T)], dim=h.grid.n)
    if mu.total_mass != 0:
        raise AssertionError("padded Hilbert measure must have total mass 0")
    return mu


def euler_signed_measure(c: FilteredComplex, grid: GridSpec) -> SignedMeasure:
    """Euler-characteristic signed measure of a filtered complex on a grid.

    Each simplex contributes (-1)^dim at its filtration value snapped up to
    the smallest dominating grid point per axis (values beyond the last
    regular value snap to the padding coordinate); a balancing atom of weight
    -chi(S) at the all-padding corner closes the total mass to 0.
    """
    if grid.n != c.num_parameters:
        raise ValueError(f"grid has {grid.n} axes, complex has {c.num_parameters}")
    m = len(c.simplices)
    n = grid.n
    k = grid.resolution
    corner = np.array([ax[k] for ax in grid.axes])
    if m == 0:
        return SignedMeasure(n, np.zeros((0, n)), np.zeros(0, np.int64))
    pts = np.empty((m, n))
    for j in range(n):
        pos = np.searchsorted(grid.axes[j], c.values[:, j], side="left")
        pts[:, j] = grid.axes[j][np.minimum(pos, k)]
    signs = (-1) ** c.dimensions
    chi = int(signs.sum())
    all_pts = np.vstack([pts, corner])
    all_w = np.concatenate([signs, [-chi]])
    mu = SignedMeasure.from_atoms(all_pts, all_w, dim=n)
    if mu.total_mass != 0:
        raise AssertionError("balanced Euler measure must have total mass 0")
    return mu


def cumulative_at(mu: SignedMeasure, x) -> int:
    """Sum of atom weights in the down-set {y : y <= x componentwise}."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape[0] != mu.dim:
        raise ValueError(f"point has {x.shape[0]} coordinates, measure has {mu.dim}")
    if len(mu) == 0:
        return 0
    mask = np.all(mu.points <= x, axis=1)
    return int(mu.weights[mask].sum())


def barcode_to_signed_measure(b: Barcode, horizon: float) -> SignedMeasure:
    """One-parameter signed measure of a barcode: +1 per birth, -1 per finite
    death, -1 at the horizon per infinite bar.  The horizon must exceed every
    finite endpoint."""
    horizon = float(horizon)
    finite = [e for bar in b.bars for e in bar if math.isfinite(e)]
    if finite and horizon <= max(finite):
        raise ValueError(
            f"horizon {horizon} must exceed every finite endpoint (max {max(finite)})")
    pts = []
    w = []
    for birth, death in b.bars:
        pts.append(birth)
        w.append(1)
        pts.append(death if math.isfinite(death) else horizon)
        w.append(-1)
    if not pts:
        return SignedMeasure(1, np.zeros((0, 1)), np.zeros(0, np.int64))
    return SignedMeasure.from_atoms(np.array(pts).reshape(-1, 1), w, dim=1)


def drop_padding(mu: SignedMeasure, grid: GridSpec) -> SignedMeasure:
    """Remove atoms sitting on any padding coordinate of the grid.

    The padded measure is the plain measure of the module plus closure atoms
    on the padding slices; dropping the latter recovers the measure of the
    module itself (total mass = dimension at the top regular corner), the
    object the transport stability bounds speak about.
    """
    if len(mu) == 0:
        return mu
    k = grid.resolution
    keep = np.ones(len(mu), dtype=bool)
    for j in range(grid.n):
        keep &= mu.points[:, j] != grid.axes[j][k]
    return SignedMeasure(mu.dim, mu.points[keep], mu.weights[keep])
