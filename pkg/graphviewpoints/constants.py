# -*- coding: utf-8 -*-
"""
Measure registry identifiers, table field names and default parameters.

Everything that names a column or a measure lives here so the CSV/DataFrame
layout stays in one place.
"""
import math

# Bumped whenever a measure definition changes meaning
REGISTRY_VERSION = "1"

# Measure identifiers, in registry order
CR = "CR"
ST = "ST"
CAR = "CAR"
AR = "AR"
ASP = "ASP"
CON = "CON"
NO = "NO"
GR = "GR"
ANGR = "ANGR"
EO = "EO"
ELD = "ELD"
ESR = "ESR"
ESO = "ESO"
EST = "EST"
NNO = "NNO"
ENO = "ENO"
NEO = "NEO"
NNOA = "NNOA"
ENOA = "ENOA"
NEOA = "NEOA"
ISO = "ISO"

MEASURE_IDS = (
    CR, ST, CAR, AR, ASP, CON, NO, GR, ANGR, EO, ELD,
    ESR, ESO, EST, NNO, ENO, NEO, NNOA, ENOA, NEOA, ISO,
)

LOWER_BETTER = "lower-better"
HIGHER_BETTER = "higher-better"

# Overlap measures are all lower-better; ISO is higher-better
POLARITY = {
    CR: LOWER_BETTER,
    ST: LOWER_BETTER,
    CAR: HIGHER_BETTER,
    AR: HIGHER_BETTER,
    ASP: HIGHER_BETTER,
    CON: LOWER_BETTER,
    NO: HIGHER_BETTER,
    GR: HIGHER_BETTER,
    ANGR: HIGHER_BETTER,
    EO: HIGHER_BETTER,
    ELD: LOWER_BETTER,
    ESR: HIGHER_BETTER,
    ESO: HIGHER_BETTER,
    EST: HIGHER_BETTER,
    NNO: LOWER_BETTER,
    ENO: LOWER_BETTER,
    NEO: LOWER_BETTER,
    NNOA: LOWER_BETTER,
    ENOA: LOWER_BETTER,
    NEOA: LOWER_BETTER,
    ISO: HIGHER_BETTER,
}

MEASURE_NAMES = {
    CR: "Edge Crossings",
    ST: "Stress",
    CAR: "Crossing Angular Resolution",
    AR: "Bounding Box Area",
    ASP: "Aspect Ratio",
    CON: "Node Concentration",
    NO: "Node Orthogonality",
    GR: "Gabriel Ratio",
    ANGR: "Angular Resolution",
    EO: "Edge Orthogonality",
    ELD: "Edge Length Deviation",
    ESR: "Edge Reflective Symmetry",
    ESO: "Edge Rotational Symmetry",
    EST: "Edge Translational Symmetry",
    NNO: "Node-Node Overlap Count",
    ENO: "Edge-Node Overlap Count",
    NEO: "Node-Edge Overlap Count",
    NNOA: "Node-Node Overlap Area",
    ENOA: "Edge-Node Overlap Area",
    NEOA: "Node-Edge Overlap Area",
    ISO: "Isometric Viewpoint Deviation",
}

# Combined-score columns
C_LR = "C-LR"
C_SQP = "C-SQP"

# Graph classes
SEMANTIC = "semantic"
LAYERED = "layered"
ENERGY = "energy"
LAYOUT_CLASSES = (SEMANTIC, LAYERED, ENERGY)
LAYOUT_CLASS_LABELS = {SEMANTIC: "S", LAYERED: "L", ENERGY: "E"}

SIZE_CLASSES = ("S", "M", "L", "XL")
SIZE_CLASS_NODE_COUNTS = {"S": 20, "M": 50, "L": 100, "XL": 200}
SIZE_CLASS_TOLERANCE = 0.25

BEST = "best"
WORST = "worst"
POLARITIES = (BEST, WORST)
LABELS = {BEST: 1, WORST: 0}

# Geometry defaults, relative to the layout's bounding radius
DEFAULT_NODE_RADIUS_FACTOR = 0.02
DEFAULT_EDGE_RADIUS_FACTOR = 0.006

# Camera defaults
DEFAULT_VERTICAL_FOV_DEG = 90.0
DEFAULT_ASPECT = 1.0
DEFAULT_DISTANCE_FACTOR = 2.5
DEFAULT_PREFERRED_UP = (0.0, 1.0, 0.0)
DEFAULT_FALLBACK_UP = (1.0, 0.0, 0.0)
UP_PARALLEL_THRESHOLD = 0.999

# Pipeline defaults
DEFAULT_SAMPLE_COUNT = 5000
DEFAULT_RASTER_RESOLUTION = 256
MIN_RASTER_RESOLUTION = 64
DEFAULT_SUBSET_SIZES = (21, 5, 3)
DEFAULT_COMBINED_SUBSET_SIZE = 5
DEGENERATE_RANGE_EPS = 1e-12

# Symmetry voting defaults
DEFAULT_SYMMETRY_ANGLE_PITCH_DEG = 5.0
DEFAULT_SYMMETRY_AXIS_OFFSET_PITCH = 0.01
DEFAULT_SYMMETRY_CENTER_PITCH = 0.02
DEFAULT_SYMMETRY_TRANSLATION_PITCH = 0.02
DEFAULT_SYMMETRY_LENGTH_SIGMA = 0.1

# Tolerances
CROSSING_EPS = 1e-9
DEPTH_TIE_EPS = 1e-9
UNIT_VECTOR_TOL = 1e-6
QUATERNION_NORM_TOL = 1e-9

# ISO normalisation constant
ISO_SIGMA_MAX = 1.0 / math.sqrt(3.0)

# Fitting defaults
DEFAULT_L2 = 1e-4
LOGISTIC_GRADIENT_TOL = 1e-8
LOGISTIC_MAX_ITERATIONS = 10_000
METHOD_LR = "lr"
METHOD_SQP = "sqp"
NORMALIZATION_L2 = "unit-euclidean-norm"
NORMALIZATION_SUM = "unit-sum"

# Selection table field names
PARTICIPANT_FIELD_NAME = "participant"
GRAPH_FIELD_NAME = "graph"
POLARITY_FIELD_NAME = "polarity"
LABEL_FIELD_NAME = "label"
LAYOUT_CLASS_FIELD_NAME = "layout_class"
SIZE_CLASS_FIELD_NAME = "size_class"
VIEW_X_FIELD_NAME = "vx"
VIEW_Y_FIELD_NAME = "vy"
VIEW_Z_FIELD_NAME = "vz"
VIEW_FIELD_NAMES = (VIEW_X_FIELD_NAME, VIEW_Y_FIELD_NAME, VIEW_Z_FIELD_NAME)
SAMPLE_INDEX_FIELD_NAME = "sample"

# Range table field names
RANGE_GRAPH_FIELD_NAME = "graph_id"
RANGE_MEASURE_FIELD_NAME = "measure_id"
RANGE_MIN_FIELD_NAME = "min"
RANGE_MAX_FIELD_NAME = "max"
RANGE_SAMPLES_FIELD_NAME = "samples"
RANGE_FIELD_NAMES = (
    RANGE_GRAPH_FIELD_NAME,
    RANGE_MEASURE_FIELD_NAME,
    RANGE_MIN_FIELD_NAME,
    RANGE_MAX_FIELD_NAME,
    RANGE_SAMPLES_FIELD_NAME,
)

# Aggregate table index levels
STRATUM_KIND_FIELD_NAME = "stratum_kind"
STRATUM_FIELD_NAME = "stratum"
STRATA_ALL = "all"
STRATA_LAYOUT = "by-layout-class"
STRATA_SIZE = "by-size-class"
STRATA_GRAPH = "by-graph"
STRATA_PARTICIPANT = "by-participant"
ALL_STRATUM_LABEL = "All"
