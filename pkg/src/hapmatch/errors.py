"""Shared exception types."""

from __future__ import annotations


class ConfigError(ValueError):
    """A configuration value or input file violates its contract."""


class StabilityError(RuntimeError):
    """An assignment that must be stable has a blocking pair.

    Carries the trial seed so the failing instance can be replayed.
    """

    def __init__(self, message: str, trial_seed: int):
        super().__init__(message)
        self.trial_seed = trial_seed
