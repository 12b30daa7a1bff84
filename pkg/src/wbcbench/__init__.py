"""Benchmark of logistic regression, a CART tree and a kernel SVM on the
Wisconsin breast-cancer data, with grid search and 10-fold cross-validation."""

__version__ = "0.1.0"
