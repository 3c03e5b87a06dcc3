"""End-to-end runs: config handling, the input -> complex -> measure ->
feature pipeline, and the random-walk stability experiment.

Determinism contract: a master seed plus the sample index derives one
sub-seed per sample (splitmix64), outputs are written atomically with
canonical formatting, and the manifest records the config hash and every
seed, so reruns with the same inputs are byte-identical.
"""
from __future__ import annotations

import configparser
import hashlib
import io as _io
import math
from dataclasses import dataclass, replace

import numpy as np

from . import io as pio
from .homology import FieldSpec, GridSpec, hilbert_function, make_grid
from .measures import (drop_padding, euler_signed_measure,
                       hilbert_signed_measure)
from .simplicial import (AttributedGraph, FilteredComplex,
                         build_function_rips, build_rips,
                         lower_star_multifiltration, vertex_descriptor)
from .transport import SWConfig, kr_distance, sliced_wasserstein
from .vectorize import (GaussianKernel, assemble_features,
                        default_bandwidths, gaussian_convolution,
                        image_l2_distance)

__all__ = [
    "PipelineConfig",
    "splitmix64",
    "sample_seed",
    "run_pipeline",
    "stability_experiment",
    "STABILITY_COLUMNS",
]


def splitmix64(state: int) -> int:
    """One step of the splitmix64 mixer; uniform, fast, and stable across
    platforms, used to derive per-sample seeds from a master seed."""
    mask = (1 << 64) - 1
    z = (state + 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


def sample_seed(master: int, index: int) -> int:
    """Seed for sample `index` under master seed `master`."""
    return splitmix64((master & ((1 << 64) - 1)) ^ splitmix64(index))


_FILTRATIONS = ("rips", "function-rips", "lower-star")
_DESCRIPTORS = ("degree", "closeness", "hks", "kde_codensity", "dtm")
_MEASURES = ("hilbert", "euler")
_VECTORIZATIONS = ("convolution", "sliced-wasserstein", "none")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a pipeline run needs, round-trippable through INI text."""

    filtration: str = "function-rips"
    max_edge_length: float = 1.0
    max_dim: int = 2
    descriptor: str = "kde_codensity"
    descriptor_t: float = 10.0
    descriptor_bandwidth: float = 0.1
    descriptor_mass: float = 0.1
    attributes: tuple[str, ...] = ()
    degrees: tuple[int, ...] = (0, 1)
    field_p: int = 11
    measure: str = "hilbert"
    resolution: int = 50
    beta: float = 0.01
    vectorization: str = "convolution"
    bandwidths: tuple[float, ...] | None = None
    axis_scales: tuple[float, ...] | None = None
    directions: int = 50
    sw_scale: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        problems = []
        if self.filtration not in _FILTRATIONS:
            problems.append(f"filtration must be one of {_FILTRATIONS}")
        if self.descriptor not in _DESCRIPTORS:
            problems.append(f"descriptor must be one of {_DESCRIPTORS}")
        if self.measure not in _MEASURES:
            problems.append(f"measure must be one of {_MEASURES}")
        if self.vectorization not in _VECTORIZATIONS:
            problems.append(f"vectorization must be one of {_VECTORIZATIONS}")
        if not self.max_edge_length > 0:
            problems.append("max_edge_length must be positive")
        if self.max_dim < 0:
            problems.append("max_dim must be nonnegative")
        if not self.degrees or any(d < 0 for d in self.degrees):
            problems.append("degrees must be nonnegative and nonempty")
        if self.resolution < 1:
            problems.append("resolution must be at least 1")
        if not 0 <= self.beta < 0.5:
            problems.append("beta must lie in [0, 0.5)")
        if self.directions < 1:
            problems.append("directions must be at least 1")
        if not self.sw_scale > 0:
            problems.append("sw scale must be positive")
        if self.bandwidths is not None and any(b <= 0 for b in self.bandwidths):
            problems.append("bandwidths must be positive")
        if self.axis_scales is not None and any(s <= 0 for s in self.axis_scales):
            problems.append("axis scales must be positive")
        if self.filtration == "lower-star" and not self.attributes:
            problems.append("lower-star needs at least one attribute name")
        if problems:
            raise ValueError("bad config: " + "; ".join(problems))

    def to_ini(self) -> str:
        parser = configparser.ConfigParser()
        parser["filtration"] = {
            "kind": self.filtration,
            "max_edge_length": repr(self.max_edge_length),
            "max_dim": str(self.max_dim),
            "descriptor": self.descriptor,
            "descriptor_t": repr(self.descriptor_t),
            "descriptor_bandwidth": repr(self.descriptor_bandwidth),
            "descriptor_mass": repr(self.descriptor_mass),
            "attributes": ",".join(self.attributes),
        }
        parser["homology"] = {
            "degrees": ",".join(str(d) for d in self.degrees),
            "field": str(self.field_p),
            "measure": self.measure,
        }
        parser["grid"] = {
            "resolution": str(self.resolution),
            "beta": repr(self.beta),
        }
        parser["vectorization"] = {
            "kind": self.vectorization,
            "bandwidths": ("auto" if self.bandwidths is None
                           else ",".join(repr(b) for b in self.bandwidths)),
            "axis_scales": ("auto" if self.axis_scales is None
                            else ",".join(repr(s) for s in self.axis_scales)),
            "directions": str(self.directions),
            "scale": repr(self.sw_scale),
        }
        parser["run"] = {"seed": str(self.seed)}
        out = _io.StringIO()
        parser.write(out)
        return out.getvalue()

    @classmethod
    def from_ini(cls, text: str, path=None) -> "PipelineConfig":
        parser = configparser.ConfigParser()
        try:
            parser.read_string(text)
        except configparser.Error as exc:
            raise pio.InputError(f"bad config: {exc}", path=path) from exc

        def get(section, option, default, convert):
            if not parser.has_option(section, option):
                return default
            raw = parser.get(section, option).strip()
            try:
                return convert(raw)
            except ValueError as exc:
                raise pio.InputError(
                    f"bad config value {section}.{option} = {raw!r}: {exc}",
                    path=path) from exc

        def floats_or_auto(raw):
            if raw == "auto" or raw == "":
                return None
            return tuple(float(part) for part in raw.split(","))

        def ints(raw):
            return tuple(int(part) for part in raw.split(",") if part.strip())

        def names(raw):
            return tuple(part.strip() for part in raw.split(",") if part.strip())

        base = cls()
        cfg = cls(
            filtration=get("filtration", "kind", base.filtration, str),
            max_edge_length=get("filtration", "max_edge_length",
                                base.max_edge_length, float),
            max_dim=get("filtration", "max_dim", base.max_dim, int),
            descriptor=get("filtration", "descriptor", base.descriptor, str),
            descriptor_t=get("filtration", "descriptor_t",
                             base.descriptor_t, float),
            descriptor_bandwidth=get("filtration", "descriptor_bandwidth",
                                     base.descriptor_bandwidth, float),
            descriptor_mass=get("filtration", "descriptor_mass",
                                base.descriptor_mass, float),
            attributes=get("filtration", "attributes", base.attributes, names),
            degrees=get("homology", "degrees", base.degrees, ints),
            field_p=get("homology", "field", base.field_p, int),
            measure=get("homology", "measure", base.measure, str),
            resolution=get("grid", "resolution", base.resolution, int),
            beta=get("grid", "beta", base.beta, float),
            vectorization=get("vectorization", "kind", base.vectorization, str),
            bandwidths=get("vectorization", "bandwidths", base.bandwidths,
                           floats_or_auto),
            axis_scales=get("vectorization", "axis_scales", base.axis_scales,
                            floats_or_auto),
            directions=get("vectorization", "directions", base.directions, int),
            sw_scale=get("vectorization", "scale", base.sw_scale, float),
            seed=get("run", "seed", base.seed, int),
        )
        try:
            cfg.validate()
        except ValueError as exc:
            raise pio.InputError(str(exc), path=path) from exc
        return cfg

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_ini().encode()).hexdigest()


def _build_complex(cfg: PipelineConfig, path):
    """Parse one input file and build its filtered complex per the config."""
    if cfg.filtration == "lower-star":
        graph = pio.read_graph(path)
        return lower_star_multifiltration(graph, cfg.attributes)
    cloud = pio.read_point_cloud(path)
    if cfg.filtration == "rips":
        return build_rips(cloud, cfg.max_edge_length, cfg.max_dim)
    desc = vertex_descriptor(cloud, cfg.descriptor, t=cfg.descriptor_t,
                             bandwidth=cfg.descriptor_bandwidth,
                             mass=cfg.descriptor_mass)
    return build_function_rips(cloud, np.asarray(desc),
                               cfg.max_edge_length, cfg.max_dim)


def measures_for_complex(c: FilteredComplex, cfg: PipelineConfig,
                         threads: int = 1):
    """Grid plus the configured signed measures of one complex, keyed by a
    short degree tag ('h0', 'h1', ... or 'euler')."""
    grid = make_grid(c, cfg.resolution, cfg.beta)
    if cfg.measure == "euler":
        return grid, {"euler": euler_signed_measure(c, grid)}
    h = hilbert_function(c, cfg.degrees, grid, field=FieldSpec(cfg.field_p),
                         threads=threads)
    return grid, {f"h{d}": hilbert_signed_measure(h, d) for d in cfg.degrees}


def _feature_vector(grid: GridSpec, parts: dict, cfg: PipelineConfig):
    kernel = None
    if cfg.bandwidths is not None:
        bw = np.asarray(cfg.bandwidths, dtype=np.float64)
        if bw.shape[0] != grid.n:
            raise ValueError(f"need {grid.n} bandwidths, got {bw.shape[0]}")
        kernel = GaussianKernel(np.diag(bw ** 2),
                                info={"bandwidths": bw.tolist(),
                                      "rule": "configured"})
    tags = sorted(parts, key=lambda t: (len(t), t))
    images = [gaussian_convolution(parts[t], grid, kernel=kernel,
                                   axis_scales=cfg.axis_scales) for t in tags]
    vec = assemble_features(images, axis_scales=cfg.axis_scales)
    meta = {
        "blocks": tags,
        "grid": {"axes": [[float(v) for v in ax] for ax in images[0].grid.axes],
                 "resolution": grid.resolution, "beta": grid.beta},
        "kernel": {"covariance": [[float(v) for v in row]
                                  for row in images[0].kernel.cov],
                   **images[0].kernel.info},
        "axis_scales": (list(map(float, cfg.axis_scales))
                        if cfg.axis_scales is not None else None),
    }
    return vec, meta


def run_pipeline(inputs, config: PipelineConfig, out_dir, threads: int = 1,
                 keep_going: bool = False) -> dict:
    """Process each input through complex, grid, measures and features,
    write per-sample outputs plus a manifest, and return the manifest."""
    import os

    config.validate()
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "config_sha256": config.content_hash(),
        "master_seed": config.seed,
        "samples": [],
        "failures": [],
    }
    for index, path in enumerate(inputs):
        stem = os.path.splitext(os.path.basename(os.fspath(path)))[0]
        record = {
            "input": os.fspath(path),
            "stem": stem,
            "seed": sample_seed(config.seed, index),
        }
        try:
            c = _build_complex(config, path)
            grid, parts = measures_for_complex(c, config, threads=threads)
            outputs = []
            for tag, mu in sorted(parts.items()):
                name = f"{stem}.measure-{tag}.json"
                pio.write_measure(mu, os.path.join(out_dir, name))
                outputs.append(name)
            if config.vectorization == "convolution":
                vec, meta = _feature_vector(grid, parts, config)
                meta["seed"] = record["seed"]
                name = f"{stem}.features.csv"
                pio.write_features(vec, os.path.join(out_dir, name))
                outputs.append(name)
                name = f"{stem}.meta.json"
                pio.atomic_write_text(os.path.join(out_dir, name),
                                      pio.dump_json(meta))
                outputs.append(name)
            record["outputs"] = sorted(outputs)
            record["simplices"] = len(c.simplices)
            manifest["samples"].append(record)
        except (pio.InputError, ValueError, ArithmeticError) as exc:
            if not keep_going:
                raise
            record["error"] = str(exc)
            manifest["failures"].append(record)
    pio.atomic_write_text(os.path.join(out_dir, "manifest.json"),
                          pio.dump_json(manifest))
    return manifest


STABILITY_COLUMNS = ("walk", "i", "j", "f_l1", "kr1", "sw_dist", "conv_l2")


def _lower_star_values(graph: AttributedGraph, f: np.ndarray) -> np.ndarray:
    """Filtration values of the graph's simplices under a two-column vertex
    function, in one fixed simplex order shared by every function."""
    vertex_part = f
    if graph.edges:
        e = np.array(graph.edges)
        edge_part = np.maximum(f[e[:, 0]], f[e[:, 1]])
        return np.vstack([vertex_part, edge_part])
    return vertex_part


def _walk_functions(graph: AttributedGraph, steps: int, noise: float,
                    rng: np.random.Generator) -> list[np.ndarray]:
    """A random walk in function space: constant start, then independent
    uniform [-noise, noise] increments per vertex and axis."""
    f = np.zeros((graph.vertex_count, 2))
    out = [f]
    for _ in range(steps - 1):
        f = f + rng.uniform(-noise, noise, size=(graph.vertex_count, 2))
        out.append(f)
    return out


def _shared_grid(all_values: np.ndarray, resolution: int) -> GridSpec:
    """Percentile-free grid over the pooled values of every walk function,
    one shape for all measures of the experiment."""
    axes = []
    for j in range(all_values.shape[1]):
        lo = float(all_values[:, j].min())
        hi = float(all_values[:, j].max())
        if hi <= lo:
            lo, hi = lo - 0.5, hi + 0.5
        regular = np.linspace(lo, hi, resolution)
        pad = 1.1 * (hi - lo) + lo
        axes.append(np.append(regular, pad))
    return GridSpec(tuple(axes), resolution, 0.0,
                    info={"rule": "pooled min/max, beta 0"})


def stability_experiment(graph: AttributedGraph, steps: int = 10,
                         walks: int = 12, noise: float = 0.5, seed: int = 0,
                         resolution: int = 128, measure: str = "hilbert",
                         directions: int = 50, sw_scale: float = 1.0,
                         threads: int = 1) -> list[tuple]:
    """Random walks of lower-star functions on one graph; for every pair of
    steps within a walk, the l1 distance between the filtrations next to the
    transport, sliced-kernel and convolution distances of the degree-0
    measures.

    All measures live on one shared grid (pooled value range, no trimming)
    and padding atoms are dropped, so each kr1 column entry is the plain
    transport distance the l1 stability bound speaks about.
    """
    if steps < 2:
        raise ValueError("need at least two steps per walk")
    if not noise > 0:
        raise ValueError("noise must be positive")
    if measure not in _MEASURES:
        raise ValueError(f"measure must be one of {_MEASURES}")
    walks_f = [
        _walk_functions(graph, steps, noise,
                        np.random.default_rng(sample_seed(seed, w)))
        for w in range(walks)
    ]
    pooled = np.vstack([f for fs in walks_f for f in fs])
    grid = _shared_grid(pooled, resolution)
    sw_cfg = SWConfig.sample(2, num_directions=directions, scale=sw_scale,
                             seed=sample_seed(seed, walks))
    kernel = GaussianKernel(np.diag(default_bandwidths(grid) ** 2))

    rows = []
    for w, fs in enumerate(walks_f):
        values = []
        mus = []
        images = []
        for f in fs:
            graph_f = replace(graph, vertex_attributes={
                "a0": f[:, 0], "a1": f[:, 1]})
            c = lower_star_multifiltration(graph_f, ("a0", "a1"))
            values.append(_lower_star_values(graph, f))
            if measure == "euler":
                mu = euler_signed_measure(c, grid)
            else:
                h = hilbert_function(c, (0,), grid, threads=threads)
                mu = hilbert_signed_measure(h, 0)
            mu = drop_padding(mu, grid)
            mus.append(mu)
            images.append(gaussian_convolution(mu, grid, kernel=kernel))
        for i in range(steps):
            for j in range(i + 1, steps):
                f_l1 = float(np.abs(values[i] - values[j]).sum())
                kr1 = kr_distance(mus[i], mus[j], p=1)
                sw = sliced_wasserstein(mus[i], mus[j], sw_cfg)
                gap = max(2.0 - 2.0 * math.exp(-sw), 0.0)
                conv = image_l2_distance(images[i], images[j])
                rows.append((w, i, j, f_l1, kr1, math.sqrt(gap), conv))
    return rows


def stability_rows_to_csv(rows) -> str:
    lines = [",".join(STABILITY_COLUMNS)]
    for row in rows:
        walk, i, j, *rest = row
        lines.append(",".join([str(walk), str(i), str(j)]
                              + [repr(float(x)) for x in rest]))
    return "\n".join(lines) + "\n"
