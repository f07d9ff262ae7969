"""Time series augmentation with weighted DTW barycenter averaging."""

from .augment import (AugmentationPolicy, DBAParams, assign_weights_average_selected,
                      augment_dataset, generate_synthetic)
from .barycenter import WeightAssignment, dba, weighted_dba
from .datasets import LabeledDataset, read_dataset, write_dataset
from .evaluation import (ProbabilityMatrix, average_posteriors, classify_1nn, evaluate,
                         one_hot_posteriors)
from .warping import dtw_distance, dtw_path

__version__ = "0.1.0"
