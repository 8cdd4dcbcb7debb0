"""Noise-aware n-ary cross-sentence relation extraction.

The package bundles a small float64 autodiff engine, a BiLSTM/PCNN/attention
relation extractor, a two-level REINFORCE sentence selector, distant
supervision labelers, a synthetic corpus generator with known ground truth,
and a CLI that wires them into reproducible experiments.
"""

import os

# Training reproducibility depends on BLAS reductions being single-threaded.
# Must happen before numpy loads its BLAS; harmless if numpy is already up.
for _var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(_var, "1")
del _var, os

__version__ = "0.1.0"
