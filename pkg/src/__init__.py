"""Uncertainty-modulated lifelong learning with Fuzzy ARTMAP."""
