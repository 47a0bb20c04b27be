"""State-vector simulation of QAOA, approximate quantum annealing and VQE."""

__version__ = "0.1.0"
