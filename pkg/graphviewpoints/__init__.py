#

from .dataset import StudyDataset, GraphBundle, read_dataset
from .projection import CameraConfig, fibonacci_viewpoints, project_viewpoint
from .pipeline import RangeTable, evaluate_raw, normalize, sample_ranges
from .fitting import WeightVector, fit_logistic, solve_max_separation, select_subset
from .study import ViewpointStudy
from . import analysis
from . import utilities
from . import constants
