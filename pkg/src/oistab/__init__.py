"""Output-input stability analysis for affine nonlinear control systems."""

__version__ = "0.1.0"
