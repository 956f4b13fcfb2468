"""Characteristic functions of elliptical, skew-elliptical and mixture
distributions, cross-validated by three independent routes: closed-form
special-function expressions, Hankel-type quadrature of the density
generator, and Monte-Carlo empirical characteristic functions."""

__version__ = "0.1.0"
