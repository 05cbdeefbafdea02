"""Exception hierarchy shared by the library and the command-line tool."""


class NibeError(Exception):
    """Base class for every error raised by this package."""

    code = "error"


class FormatError(NibeError, ValueError):
    """Input bytes do not follow a declared wire or file format."""

    code = "format"


class WrongLength(FormatError):
    code = "wrong-length"


class BadMagic(FormatError):
    code = "bad-magic"


class UnsupportedVersion(FormatError):
    code = "unsupported-version"


class NonCanonicalEncoding(FormatError):
    code = "non-canonical"


class PointNotOnCurve(FormatError):
    code = "not-on-curve"


class HeaderMismatch(FormatError):
    """Two files that must describe the same scheme instance disagree."""

    code = "header-mismatch"


class Unsupported(NibeError):
    code = "unsupported"


class CryptoRejection(NibeError):
    """A cryptographic check failed; no plaintext or key material is released."""

    code = "crypto-rejection"


class TagMismatch(CryptoRejection):
    code = "tag-mismatch"


class MalformedKey(CryptoRejection):
    code = "malformed-key"


class InconsistentParams(CryptoRejection):
    code = "inconsistent-params"


class ProtocolViolation(NibeError):
    """An adversary broke the rules of the security game."""

    code = "protocol-violation"


class InfeasibleEnumeration(NibeError, ValueError):
    code = "infeasible-enumeration"
