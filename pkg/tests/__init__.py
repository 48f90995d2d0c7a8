"""
J-Disc Test Suite
=================
Tests for the grid, Cauchy-Green transforms, structures, the disc solver,
Levi forms, Kobayashi bounds, experiments and the jdisc CLI
"""
