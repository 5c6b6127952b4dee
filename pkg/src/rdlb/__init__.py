"""Dynamic loop self-scheduling with robust rescheduling.

Library layout:
  techniques  chunk-size rules for the 14 scheduling techniques
  ledger      per-iteration task states and duplicate selection
  workloads   iteration-time generators (constant, uniform, gaussian, mandelbrot)
  simulator   deterministic master-worker discrete-event simulation
  metrics     closed-form failure cost model and robustness metrics
  experiment  technique x scenario x trial matrices with CSV and figure output
  cli         command-line driver (see `rdlb --help`)
"""

__version__ = "0.1.0"
