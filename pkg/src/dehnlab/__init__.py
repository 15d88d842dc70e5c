"""Random instances of Dehn search problems and completion/folding solvers."""

__version__ = "0.1.0"
