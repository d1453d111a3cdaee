"""
Unit tests for omt-lab.

Fast tests of individual modules: exact cases, contracts and small
Monte Carlo samples with fixed seeds.
"""
