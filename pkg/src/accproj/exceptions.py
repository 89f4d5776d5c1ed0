"""Exception hierarchy shared by every module of the package."""


class AccProjError(Exception):
    """Base class for all errors raised by accproj."""


class RankDeficient(AccProjError, ArithmeticError):
    """A factored column set is numerically linearly dependent."""


class RankDeficientBlock(RankDeficient):
    """The row group with index ``block`` could not be factored."""

    def __init__(self, block, message=None):
        self.block = block
        super().__init__(message or f"row block {block} is rank deficient; "
                                    "change the block size or permute rows")


class ZeroMatrix(AccProjError, ValueError):
    pass


class OrthogonalRhs(AccProjError, ValueError):
    """A'b vanishes, so no starting projection can be formed."""


class DegenerateDirection(AccProjError, ArithmeticError):
    pass


class NotConverged(AccProjError):
    """Raised by a solver that ran out of iterations.

    The partial :class:`~accproj.solvers.SolveReport` is kept on ``report``.
    """

    def __init__(self, report, message=None):
        self.report = report
        super().__init__(message or "solver did not reach the requested tolerance")


class Diverged(NotConverged):
    pass


class SingularBlock(AccProjError, ArithmeticError):
    def __init__(self, block, message=None):
        self.block = block
        super().__init__(message or f"diagonal block {block} is singular")


class Singular(AccProjError, ArithmeticError):
    pass


class ParseError(AccProjError, ValueError):
    """Malformed Matrix Market input; ``line`` is 1-based."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = f"{path or '<input>'}:{line}: " if line is not None else ""
        super().__init__(where + message)


class UnsupportedField(ParseError):
    pass


class QuadratureFailure(AccProjError, ArithmeticError):
    pass
