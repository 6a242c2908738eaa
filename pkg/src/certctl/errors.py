"""Exception hierarchy shared by every module of the package."""


class CertctlError(Exception):
    """Base class for all errors raised by certctl."""


class DomainError(CertctlError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class UnsupportedKindError(CertctlError, ValueError):
    """An operation was asked of a distribution or copula kind that lacks it."""


class BracketError(CertctlError):
    """A root bracket does not contain a sign change."""


class NotPositiveDefiniteError(CertctlError, ValueError):
    def __init__(self, pivot, value):
        self.pivot = pivot
        self.value = value
        super().__init__(
            f"matrix is not positive definite: pivot {pivot} has value {value:.6g}"
        )


class RepresentationError(CertctlError):
    """g(x, mu) > 0, so the spherical-radial representation does not apply."""


class TStarError(CertctlError):
    """The G-decreasing threshold search could not isolate a single root."""


class NoSignChangeError(TStarError):
    def __init__(self, sign, bracket):
        self.sign = sign
        self.bracket = bracket
        word = "positive" if sign > 0 else "negative"
        super().__init__(
            f"psi' keeps a {word} sign on [{bracket[0]:.6g}, {bracket[1]:.6g}]"
        )


class OscillationError(TStarError):
    def __init__(self, changes, bracket):
        self.changes = changes
        self.bracket = bracket
        super().__init__(
            f"psi' changes sign {changes} times on [{bracket[0]:.6g}, {bracket[1]:.6g}];"
            " the density is not G-decreasing on this bracket"
        )


class CertificationError(CertctlError):
    """A sampled concavity certificate required by a computation failed."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class SpecError(CertctlError, ValueError):
    """A problem specification could not be parsed or is inconsistent."""
