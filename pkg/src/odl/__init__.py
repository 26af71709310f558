"""Orbit density lab.

Library plus experiment CLI for measuring how fast group-orbit unions of
finite point sets fill the circle, the unit interval, and the n-torus,
together with the arithmetic toolkit (continued fractions, generalized
Ramanujan sums, bump-function Fourier decay) those experiments rest on.
"""

__version__ = "0.1.0"
