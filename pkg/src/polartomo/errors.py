"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for inputs that violate a schema or a precondition, 3 for numerical
failures during a computation.
"""


class PolartomoError(Exception):
    exit_code = 1

    def to_dict(self):
        return {"error": type(self).__name__, "message": str(self)}


class InputError(PolartomoError, ValueError):
    exit_code = 2


class NumericalError(PolartomoError, ArithmeticError):
    exit_code = 3


# --- state validation -------------------------------------------------------

class DimensionMismatch(InputError):
    pass


class NotHermitian(InputError):
    def __init__(self, deviation):
        self.deviation = float(deviation)
        super().__init__(f"matrix is not Hermitian (max |M - M^H| = {self.deviation:.3e})")

    def to_dict(self):
        return {**super().to_dict(), "deviation": self.deviation}


class TraceNotOne(InputError):
    def __init__(self, trace):
        self.trace = complex(trace)
        super().__init__(f"trace is {self.trace.real:.12g}, expected 1")

    def to_dict(self):
        return {**super().to_dict(), "trace": self.trace.real}


class NegativeEigenvalue(InputError):
    def __init__(self, value):
        self.value = float(value)
        super().__init__(f"negative eigenvalue {self.value:.6g}")

    def to_dict(self):
        return {**super().to_dict(), "min_eigenvalue": self.value}


class OutOfRange(InputError):
    pass


# --- tomography --------------------------------------------------------------

class UnknownLabel(InputError):
    pass


class MissingSettings(InputError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__("missing settings: " + ", ".join(self.missing))


class DegenerateSigma(InputError):
    pass


class UnderdeterminedSystem(NumericalError):
    def __init__(self, null_dim):
        self.null_dim = int(null_dim)
        super().__init__(f"measurement set leaves a {self.null_dim}-dimensional null space")

    def to_dict(self):
        return {**super().to_dict(), "null_dim": self.null_dim}


class NoConvergence(NumericalError):
    """Iteration budget exhausted; ``best`` holds the best iterate found."""

    def __init__(self, message, best=None, index=None):
        self.best = best
        self.index = index
        super().__init__(message)

    def to_dict(self):
        d = super().to_dict()
        if self.index is not None:
            d["member"] = self.index
        return d


# --- metrics / counts / fitting ---------------------------------------------

class DegenerateDenominator(NumericalError):
    pass


class ZeroCoincidences(NumericalError):
    def __init__(self, g2):
        self.g2 = float(g2)
        super().__init__("zero coincidences: g2 is defined but its error bar is not")


class ZeroDenominator(NumericalError):
    pass


class InsufficientPoints(InputError):
    pass


class SingularDesign(NumericalError):
    pass


class ZeroSigma(InputError):
    pass


# --- Monte Carlo -------------------------------------------------------------

class NonPhysical(NumericalError):
    """Background subtraction left a negative eigenvalue."""

    def __init__(self, min_eigenvalue):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(f"state is non-physical after subtraction (min eigenvalue {self.min_eigenvalue:.6g})")

    def to_dict(self):
        return {**super().to_dict(), "min_eigenvalue": self.min_eigenvalue}


class RejectionBudgetExceeded(NumericalError):
    pass


class EmptyEnsemble(InputError):
    pass


class SchemaError(InputError):
    pass
