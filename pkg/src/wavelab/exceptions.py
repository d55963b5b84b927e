"""Exception types shared across the package."""


class WavelabError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(WavelabError, ValueError):
    """Invalid waveform, channel, noise, layout, or simulation configuration."""


class DimensionError(WavelabError, ValueError):
    """Vector or matrix size does not match the expected dimensions."""


class EqualizationError(WavelabError, RuntimeError):
    """Channel too ill-conditioned to equalize.

    Carries the condition-number estimate that triggered the refusal.
    """

    def __init__(self, message: str, condition: float):
        super().__init__(message)
        self.condition = condition
