"""plemelj-lab: fractional Sobolev norms, Cauchy singular integrals and
fractal regularity analysis on Jordan curves."""

__version__ = "0.1.0"
