"""
Configuration module for BoundZNE
"""

from .settings import SettingsError, load_benchmark_defaults, log_level, solve_settings_from_env, worker_count

__all__ = ['SettingsError', 'load_benchmark_defaults', 'log_level', 'solve_settings_from_env', 'worker_count']
