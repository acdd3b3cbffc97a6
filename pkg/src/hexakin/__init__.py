"""Kinematics engine for general 6-UPS Stewart platforms."""
