"""Exception hierarchy, one class per error family the CLI maps to exit codes."""


class RoomshiftError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RoomshiftError):
    """Invalid parameter or configuration value."""


class UnsupportedInputError(RoomshiftError):
    """Input data that the operation cannot process (e.g. order-0 ARIR)."""


class NoDirectSoundError(RoomshiftError):
    """No direct-sound peak could be found in the impulse response."""


class FileFormatError(RoomshiftError):
    """Malformed or unsupported audio/preset file content."""


class PresetError(RoomshiftError):
    """Preset version, checksum or invariant violation."""


class TrajectoryError(RoomshiftError):
    """Malformed listener trajectory file."""


class GeometryError(RoomshiftError):
    """Degenerate spatial configuration (e.g. sound event at the origin)."""
