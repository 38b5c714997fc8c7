"""
Shared pytest configuration.

Property suites run under a derandomized hypothesis profile so every run draws
the same examples; set HYPOTHESIS_PROFILE=explore for fresh random draws.
"""

import os
import sys
from pathlib import Path

from hypothesis import HealthCheck, settings

# Add the project root to sys.path
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("explore", max_examples=500, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "ci"))
