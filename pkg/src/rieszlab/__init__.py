"""Eigenvalue enclosures, perturbation series and Riesz-basis diagnostics for
locally form-subordinated perturbations of self-adjoint operators with
discrete spectrum."""

__version__ = "0.1.0"
