"""Magnetic-field-driven trapped-ion gate design and simulation."""
