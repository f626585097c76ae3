"""Exception hierarchy.

Every error carries a short machine-parsable ``code`` so the command line
front end can print ``CODE: message`` and scripts can branch on it.
"""


class TwistRenormError(Exception):
    code = "ERROR"

    def __init__(self, message="", **context):
        super().__init__(message)
        self.context = context

    def __str__(self):
        msg = super().__str__()
        if self.context:
            extra = ", ".join(f"{k}={v}" for k, v in sorted(self.context.items()))
            msg = f"{msg} ({extra})" if msg else extra
        return msg


# series / renormalization
class DomainEscape(TwistRenormError):
    code = "DOMAIN_ESCAPE"


class NoConvergence(TwistRenormError):
    code = "NO_CONVERGENCE"


class SingularJacobian(TwistRenormError):
    code = "SINGULAR_JACOBIAN"


class DegenerateScaling(TwistRenormError):
    code = "DEGENERATE_SCALING"


class NormalizationFailure(TwistRenormError):
    code = "NORMALIZATION_FAILURE"


class InvalidSchedule(TwistRenormError):
    code = "INVALID_SCHEDULE"


# map evaluation
class NoRoot(TwistRenormError):
    code = "NO_ROOT"


class SingularTwist(TwistRenormError):
    code = "SINGULAR_TWIST"


class MultipleRootsWarning(UserWarning):
    """Several preimages in the bracket; the smallest-|X| root was used."""

    code = "MULTIPLE_ROOTS"


# microscope
class NoSymmetricFixedPoint(TwistRenormError):
    code = "NO_SYMMETRIC_FIXED_POINT"


class AmbiguousFixedPoint(TwistRenormError):
    code = "AMBIGUOUS_FIXED_POINT"


class NestingViolation(TwistRenormError):
    code = "NESTING_VIOLATION"


class NotPermutation(TwistRenormError):
    code = "NOT_PERMUTATION"


class NotSingleCycle(TwistRenormError):
    code = "NOT_SINGLE_CYCLE"


# curves
class DegenerateParam(TwistRenormError):
    code = "DEGENERATE_PARAM"


# obstruction
class ChainViolation(TwistRenormError):
    code = "CHAIN_VIOLATION"


class TwistViolation(TwistRenormError):
    code = "TWIST_VIOLATION"


class ConeEscape(TwistRenormError):
    code = "CONE_ESCAPE"


# command line
class InputError(TwistRenormError):
    code = "MISSING_INPUT"


class MalformedInput(TwistRenormError):
    code = "MALFORMED_JSON"
