"""Numerical primitives, validation, metrics and file helpers"""
