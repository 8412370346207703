"""Named failure types. Every check that can fail raises one of these."""


class QFTVerifyError(Exception):
    """Base class for all package errors."""


class ZeroMasslessMomentum(QFTVerifyError, ValueError):
    pass


class NotUnimodular(QFTVerifyError, ValueError):
    pass


class NotSemidefinite(QFTVerifyError, ValueError):
    pass


class IdentityViolation(QFTVerifyError):
    def __init__(self, clause, residual=None, message=None):
        self.clause = clause
        self.residual = residual
        super().__init__(message or f"identity {clause!r} violated (residual {residual})")


class ConditionViolation(QFTVerifyError):
    def __init__(self, condition, residual=None, message=None):
        self.condition = condition
        self.residual = residual
        super().__init__(message or f"condition {condition!r} violated (residual {residual})")


class NotNormalized(QFTVerifyError, ValueError):
    pass


class MasslessFermion(QFTVerifyError, ValueError):
    pass


class InvalidPermutation(QFTVerifyError, ValueError):
    pass


class TooLarge(QFTVerifyError, ValueError):
    pass


class OffShell(QFTVerifyError, ValueError):
    pass


class OutsideForwardCone(QFTVerifyError, ValueError):
    pass


class ForwardKinematics(QFTVerifyError, ValueError):
    pass


class ConservationViolated(QFTVerifyError, ValueError):
    pass


class IndistinguishableSetup(QFTVerifyError, ValueError):
    pass


class PropagatorPole(QFTVerifyError, ZeroDivisionError):
    pass


class SemidefinitenessViolated(QFTVerifyError):
    pass


class PolarizationNotTransverse(QFTVerifyError, ValueError):
    pass


class NegativeForm(QFTVerifyError):
    pass


class CoincidentMomenta(QFTVerifyError, ValueError):
    pass


class BelowThreshold(QFTVerifyError, ValueError):
    pass


class NotCenterOfMomentum(QFTVerifyError, ValueError):
    pass


class QuadratureFailure(QFTVerifyError, RuntimeError):
    pass


# usage / input errors surfaced by the command line (exit code 2)


class InputError(QFTVerifyError, ValueError):
    pass


class InvalidGrid(InputError):
    pass


class ConfigError(InputError):
    pass


class MalformedInput(InputError):
    pass
