"""Partition Sort performance laboratory.

Instrumented Partition Sort, negative binomial key generators, a benchmark
harness, empirical-O regression, and balanced factorial ANOVA.
"""
from .anova import AnovaTable, Factor, FactorialDesign, Observation, anova_full_factorial
from .distgen import (Binomial, NegBinomial, UniformInt, binomial_sample, generate_dataset,
                      geometric_sample, nb_sample)
from .fdist import f_pvalue, reg_inc_beta
from .rng import RngStream, derive_seed
from .sortcore import (DeterministicSelect, RandomizedSelect, SortStats, partition,
                       partition_sort, quicksort_baseline, select_kth)
from .statmodel import BasisSpec, ModelFit, basis, least_squares_fit, predict, select_model

__version__ = "0.1.0"

__all__ = [
    "AnovaTable", "Factor", "FactorialDesign", "Observation", "anova_full_factorial",
    "Binomial", "NegBinomial", "UniformInt", "binomial_sample", "generate_dataset",
    "geometric_sample", "nb_sample", "f_pvalue", "reg_inc_beta", "RngStream", "derive_seed",
    "DeterministicSelect", "RandomizedSelect", "SortStats", "partition", "partition_sort",
    "quicksort_baseline", "select_kth", "BasisSpec", "ModelFit", "basis",
    "least_squares_fit", "predict", "select_model",
]
