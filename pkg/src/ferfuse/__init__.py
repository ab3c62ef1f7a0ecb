"""ferfuse: hybrid feature fusion + dimensionality reduction benchmark.

Feature extraction (SIFT, ORB, precomputed deep features), k-means
descriptor pooling, six from-scratch dimensionality reducers behind one
fit/transform interface, three classifiers, and a deterministic pipeline
CLI with ablation and dimension-sweep harnesses.
"""

__version__ = "0.1.0"
