"""Built-in hyperparameter grids, one per model family.

The logistic-regression C axis is listed as 0, 0.5, ..., 10; C = 0 is not a
valid inverse strength, so those points are skipped (and logged) by the grid
search instead of being dropped silently here.
"""

from wbcbench.model_eval import GridSpec

SVM_GRID = GridSpec.from_mapping(
    "svm",
    {
        "C": [0.1, 0.5, 1, 3, 9, 100],
        "gamma": [0.1, 1, 10],
        "kernel": ["linear", "poly", "rbf", "sigmoid"],
    },
)

DT_GRID = GridSpec.from_mapping(
    "dt",
    {
        "max_depth": [1, 2, 5, 10, 15, 20, 30, 50, 100],
        "min_samples_split": [2, 5, 10, 15, 20, 30, 50],
        "min_samples_leaf": [1, 2, 5, 10, 15, 20, 30, 50],
    },
)

LR_GRID = GridSpec.from_mapping(
    "lr",
    {
        "C": [i * 0.5 for i in range(21)],
        "solver": ["lbfgs", "newton-cg", "newton-cholesky", "sag", "saga"],
        "penalty": ["none", "l1", "l2"],
    },
)

BUILTIN_GRIDS = {"lr": LR_GRID, "dt": DT_GRID, "svm": SVM_GRID}


def builtin_grid(family, criterion="gini"):
    """Built-in grid for a family; the tree grid gets a fixed ``criterion`` axis."""
    spec = BUILTIN_GRIDS[family]
    if family == "dt":
        return GridSpec(spec.family, spec.axes + (("criterion", (criterion,)),))
    return spec
