# Caginalp Type III Galerkin Solver
__version__ = "1.0.0"
