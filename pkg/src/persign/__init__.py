"""Signed-measure vectorization of multiparameter persistent homology.

Point clouds and attributed graphs become multifiltered complexes; fiberwise
barcodes give Hilbert functions whose Mobius inversion is a signed point
measure; the Euler characteristic gives a cheaper one.  Measures compare
under exact transport distances or a sliced approximation, and convolve into
stable feature vectors.
"""
from .homology import (Barcode, FieldSpec, GridSpec, HilbertFunction,
                       fiber_barcode, hilbert_function, make_grid)
from .measures import (SignedMeasure, barcode_to_signed_measure,
                       cumulative_at, drop_padding, euler_signed_measure,
                       hilbert_signed_measure)
from .pipeline import (PipelineConfig, run_pipeline, sample_seed,
                       stability_experiment)
from .simplicial import (AttributedGraph, Descriptor, FilteredComplex,
                         PointCloud, ValidationReport, build_function_rips,
                         build_rips, lower_star_multifiltration,
                         validate_complex, vertex_descriptor)
from .transport import (GramMatrix, SWConfig, brute_force_kr, kr_distance,
                        kr_distance_1d, push_forward, sliced_wasserstein,
                        sw_gram)
from .vectorize import (ConvolutionImage, FeatureVector, GaussianKernel,
                        TentKernel, assemble_features, default_bandwidths,
                        gaussian_convolution, image_l2_distance,
                        image_l2_norm)

__version__ = "0.1.0"

__all__ = [
    "AttributedGraph",
    "Barcode",
    "ConvolutionImage",
    "Descriptor",
    "FeatureVector",
    "FieldSpec",
    "FilteredComplex",
    "GaussianKernel",
    "GramMatrix",
    "GridSpec",
    "HilbertFunction",
    "PipelineConfig",
    "PointCloud",
    "SWConfig",
    "SignedMeasure",
    "TentKernel",
    "ValidationReport",
    "assemble_features",
    "barcode_to_signed_measure",
    "brute_force_kr",
    "build_function_rips",
    "build_rips",
    "cumulative_at",
    "default_bandwidths",
    "drop_padding",
    "euler_signed_measure",
    "fiber_barcode",
    "gaussian_convolution",
    "hilbert_function",
    "hilbert_signed_measure",
    "image_l2_distance",
    "image_l2_norm",
    "kr_distance",
    "kr_distance_1d",
    "lower_star_multifiltration",
    "make_grid",
    "push_forward",
    "run_pipeline",
    "sample_seed",
    "sliced_wasserstein",
    "stability_experiment",
    "sw_gram",
    "validate_complex",
    "vertex_descriptor",
]
