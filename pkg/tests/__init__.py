# Test package for the energy resilience toolkit
"""
Test suite for energetic resilience of driftless linear systems.

This package contains tests for:
- Matrix helpers, system splitting and adversary signals
- Nominal and malfunctioning minimum-energy controls
- Worst-case energy bounds and the resilience lower bound
- Numerical oracles, closed-loop simulation and ratio sweeps
- Configuration loading, report output and the command line

Run tests with: python -m pytest tests/
"""
