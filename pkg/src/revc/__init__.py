"""revc: compile irreversible boolean programs to reversible Toffoli networks."""

__version__ = "0.1.0"
