"""Figure generation from benchmark harness CSVs.

Three figure kinds, matching the CSV formats the integrator harness
writes:

* ``order``  — log-log error vs step size with dashed reference slopes,
* ``drift``  — semilog-y energy error vs time, one series per method,
* ``sphere`` — 3-D unit-sphere trajectory overlays (fine curves + coarse
  markers).
"""

from .figures import plot_drift, plot_order, plot_sphere, read_csv

__all__ = ["plot_drift", "plot_order", "plot_sphere", "read_csv"]

__version__ = "0.1.0"
