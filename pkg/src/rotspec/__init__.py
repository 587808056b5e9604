"""Rotation sets, localized entropy and entropy spectra for shifts of finite type."""

__version__ = "0.1.0"
