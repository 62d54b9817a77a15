"""Coble cubics, rank-four trivectors and the chord group law over finite fields."""

__version__ = "0.1.0"
