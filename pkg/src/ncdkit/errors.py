"""Exception hierarchy for ncdkit."""


class NcdkitError(Exception):
    """Base class for all ncdkit errors."""


class CodecError(NcdkitError):
    """A codec failed: bad parameters, init failure, or a failing external command."""


class DegenerateInputError(NcdkitError):
    """NCD is undefined because both compressed lengths are zero."""


class ManifestError(NcdkitError):
    """A corpus manifest is malformed or disagrees with the files on disk."""


class ConfigurationError(NcdkitError):
    """An experiment configuration cannot be satisfied by the given corpus."""
