"""Statistical analytics for foundation-model ecosystems.

Homogeneous-outcome analysis against an independence baseline, holistic
evaluation metrics, head-to-head meta-analysis and a composite-index engine.
"""

__version__ = "0.1.0"
