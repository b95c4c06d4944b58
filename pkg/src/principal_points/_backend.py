"""Kernel selection: compiled extension if it imports, pure Python otherwise."""
try:
    from ._kernels import dp_partition, thomas_solve
    BACKEND = "cython"
except ImportError:  # extension not built
    from ._kernels_py import dp_partition, thomas_solve
    BACKEND = "python"

__all__ = ["BACKEND", "dp_partition", "thomas_solve"]
