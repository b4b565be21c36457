"""Measurement-based cooling of a spin ensemble and an oscillator via a pulsed probe spin."""

__version__ = "0.1.0"
