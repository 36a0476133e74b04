"""Exception hierarchy shared across the toolkit."""


class SvgAtomError(Exception):
    """Base class for all toolkit errors."""


class MalformedXml(SvgAtomError):
    pass


class NoSvgRoot(SvgAtomError):
    pass


class ArityError(SvgAtomError):
    pass


class UnknownCommandLetter(SvgAtomError):
    pass


class UnknownTransformTerm(SvgAtomError):
    pass


class CyclicReference(SvgAtomError):
    pass


class PathStartsWithoutMove(SvgAtomError):
    pass


class EmptyGeometry(SvgAtomError):
    pass


class InvariantViolation(SvgAtomError):
    pass


class GrammarError(SvgAtomError):
    """Token rejected by the sequence grammar.

    position: index of the offending token; state: grammar state name at
    that point; token: the offending id.
    """

    def __init__(self, position, state, token):
        super().__init__(f"illegal token {token} at position {position} (state {state})")
        self.position = position
        self.state = state
        self.token = token


class TruncatedSequence(SvgAtomError):
    pass


class DimensionMismatch(SvgAtomError):
    pass


class TooSmall(SvgAtomError):
    pass


class BadMagic(SvgAtomError):
    pass


class EmptyCorpus(SvgAtomError):
    pass


class EmptyInput(SvgAtomError):
    pass


class DuplicateId(SvgAtomError):
    pass
