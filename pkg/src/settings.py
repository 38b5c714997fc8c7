"""
Tolerance and run-default settings for the resilience toolkit.

Defaults live in DEFAULT_TOLERANCES; every one of them can be overridden
through a RESILIENCE_* environment variable (usually from a .env file loaded by
the entry script) and, for a single run, through the `tolerances` section of a
run configuration.
"""

import os
from typing import Dict, Literal

ToleranceName = Literal[
    'pinv_cutoff_factor', 'symmetry', 'eigen_clamp', 'quadrature_rtol',
    'degenerate', 'feasibility_slack', 'ordering', 'oracle_rtol',
    'regulation', 'piece_spread'
]

# Defaults for each tolerance, keyed by the name used in configs
DEFAULT_TOLERANCES: Dict[str, float] = {
    'pinv_cutoff_factor': 1.0,   # multiplies max(rows, cols) * eps * sigma_max
    'symmetry': 1e-12,           # max |S - S^T| relative to max |S|
    'eigen_clamp': 1e-12,        # eigenvalues in (-clamp, 0) become 0
    'quadrature_rtol': 1e-9,     # adaptive quadrature fallback
    'degenerate': 1e-12,         # cross term relative to ||B_c^+ x0||
    'feasibility_slack': 1e-12,  # the vertex feasibility condition accepted at 1 + slack
    'ordering': 1e-9,            # sweep ordering invariant
    'oracle_rtol': 1e-8,         # closed form vs discretized program
    'regulation': 1e-9,          # terminal error relative to ||x0||
    'piece_spread': 1e-10,       # piece spread of the fixed-mean minimizer
}


class ToleranceSettings:
    """Reads tolerances and run defaults from the environment"""

    def __init__(self):
        self.tolerances = {
            name: float(os.getenv(f'RESILIENCE_{name.upper()}', str(default)))
            for name, default in DEFAULT_TOLERANCES.items()
        }
        self.vertex_cap = int(os.getenv('RESILIENCE_VERTEX_CAP', '20'))
        self.threads = int(os.getenv('RESILIENCE_THREADS', '1'))
        self.log_level = os.getenv('RESILIENCE_LOG_LEVEL', 'INFO').upper()
        self.log_file = os.getenv('RESILIENCE_LOG_FILE', '')
        self.out_dir = os.getenv('RESILIENCE_OUT_DIR', './results')

    def get_tolerance(self, name: ToleranceName) -> float:
        """
        Returns the tolerance registered under `name`.

        Args:
            name: One of the keys of DEFAULT_TOLERANCES

        Returns:
            The configured value
        """
        if name not in self.tolerances:
            raise KeyError(f"unknown tolerance '{name}'")
        return self.tolerances[name]

    def override(self, values: Dict[str, float]) -> Dict[str, float]:
        """Apply per-run overrides, returning the previous values so they can be restored"""
        previous = {}
        for name, value in values.items():
            previous[name] = self.get_tolerance(name)
            self.tolerances[name] = float(value)
        return previous

    def reload(self):
        """Re-read the environment (after load_dotenv has run)"""
        self.__init__()


# Global instance for easy access
settings = ToleranceSettings()


def get_tolerance(name: ToleranceName) -> float:
    """Convenience function to get a tolerance"""
    return settings.get_tolerance(name)


def get_run_defaults() -> dict:
    """
    Get the non-tolerance run defaults.

    Returns:
        Dictionary with vertex_cap, threads, log_level, log_file and out_dir
    """
    return {
        'vertex_cap': settings.vertex_cap,
        'threads': settings.threads,
        'log_level': settings.log_level,
        'log_file': settings.log_file,
        'out_dir': settings.out_dir,
    }
