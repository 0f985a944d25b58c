"""Exception hierarchy shared by the library, CLI, and HTTP service."""


class BeamlabError(Exception):
    """Base class for all beamlab-specific errors."""


class ConfigError(BeamlabError):
    """Invalid or inconsistent configuration (CLI exit code 2)."""


class DataError(BeamlabError):
    """Problem with a dataset or checkpoint file (CLI exit code 3)."""


class DataFormatError(DataError):
    """File does not start with the expected magic bytes or has a garbled header."""


class DataVersionError(DataError):
    """File format version is not supported by this build."""


class DataTruncatedError(DataError):
    """File ends before the declared payload is complete."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (at byte offset {byte_offset})")
        self.byte_offset = byte_offset


class DataDimensionError(DataError):
    """Stored dimensions are internally inconsistent."""


class NumericError(BeamlabError):
    """Non-finite value produced where finite math was required (CLI exit code 4)."""
