"""Differential-abundance analysis for compositional count data.

Thin Python façade over the compiled extension. The extension lives inside
the package in an installed wheel and next to it on ``PYTHONPATH`` when run
against a plain CMake build tree.
"""

try:
    from linda._core import analyze_files, analyze_matrix, simulate_metrics
except ImportError:  # CMake build tree: _core is a top-level module
    from _core import analyze_files, analyze_matrix, simulate_metrics

__all__ = ["analyze_files", "analyze_matrix", "simulate_metrics"]
__version__ = "0.1.0"
