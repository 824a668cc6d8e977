"""Exception types raised across the pipeline."""


class SignatureError(Exception):
    """Base class for every error raised by specsig."""


# ingestion
class IngestError(SignatureError):
    pass


class MissingFile(IngestError, FileNotFoundError):
    pass


class NotRiffWave(IngestError):
    pass


class UnsupportedFormat(IngestError):
    pass


class TruncatedData(IngestError):
    pass


class LengthMismatch(SignatureError, ValueError):
    pass


# manifest / configuration
class ManifestError(SignatureError):
    pass


class ParseError(ManifestError):
    pass


class EmptyBook(ManifestError):
    pass


class DuplicateTrack(ManifestError):
    pass


# spectra and empirical distributions
class EmptySignal(SignatureError, ValueError):
    pass


class EmptyInput(SignatureError, ValueError):
    pass


class AllZeroMagnitudes(SignatureError, ValueError):
    pass


class DegenerateDistribution(SignatureError, ValueError):
    pass


# distributions and fitting
class InvalidSpec(SignatureError, ValueError):
    pass


class QOutOfRange(SignatureError, ValueError):
    pass


class NonConvergentQuadrature(SignatureError, ArithmeticError):
    pass


class DegenerateInput(SignatureError, ValueError):
    pass


class NoUsableFit(SignatureError):
    pass


# pitch and synthesis
class NonPositiveFrequency(SignatureError, ValueError):
    pass


class NyquistViolation(SignatureError, ValueError):
    pass
