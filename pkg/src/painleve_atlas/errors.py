"""Exception types shared across the package.

Every failure mode raised by the library is a subclass of AtlasError, so CLI
code can map library errors to exit codes in one place.
"""


class AtlasError(Exception):
    pass


# ---- expression layer ----

class ExprSyntaxError(AtlasError):
    """Malformed expression source; offset is a 0-based byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte {offset})")
        self.offset = offset


class UnknownSymbol(AtlasError):
    def __init__(self, name: str, offset: int = -1):
        super().__init__(f"unknown symbol '{name}'")
        self.name = name
        self.offset = offset


class DivisionByZero(AtlasError):
    pass


class PoleAtPoint(AtlasError):
    """Numeric evaluation hit a zero denominator; residual = |den(point)|."""

    def __init__(self, residual: float):
        super().__init__(f"denominator vanishes at the point (|den| = {residual})")
        self.residual = residual


class UnboundSymbol(AtlasError):
    def __init__(self, names):
        names = sorted(str(n) for n in names)
        super().__init__("unbound symbols: " + ", ".join(names))
        self.names = names


# ---- system catalog / truncation ----

class UnknownEquation(AtlasError):
    pass


class ConstraintViolated(AtlasError):
    pass


class MonomialAboveFace(AtlasError):
    def __init__(self, monomial, value, s):
        super().__init__(
            f"monomial {monomial} has weighted degree {value} above the face value {s}")
        self.monomial = monomial
        self.value = value
        self.s = s


# ---- weight fitting ----

class NotCoplanar(AtlasError):
    pass


class Underdetermined(AtlasError):
    pass


# ---- weighted projective atlas ----

class OnOverlapBoundary(AtlasError):
    pass


class NonIntegerPower(AtlasError):
    pass


class NotPolynomializable(AtlasError):
    pass


class PositiveDimensionalUnexpected(AtlasError):
    pass


# ---- series engine ----

class NoBalance(AtlasError):
    pass


class ResonanceObstruction(AtlasError):
    def __init__(self, step, residual):
        super().__init__(f"incompatible resonance at step {step}: residual {residual}")
        self.step = step
        self.residual = residual


class TruncationTooShort(AtlasError):
    pass


# ---- Backlund maps ----

class NotBirational(AtlasError):
    pass


# ---- blow-ups ----

class NonDiagonalizable(AtlasError):
    pass


class NonIntegerWeightRatio(AtlasError):
    pass


class NotHamiltonianInChart(AtlasError):
    pass


# ---- dynamics ----

class StepSizeUnderflow(AtlasError):
    pass


class NoBoundedChart(AtlasError):
    pass


class PathHitsFixedSingularity(AtlasError):
    pass


class NotDefinedForThisWeight(AtlasError):
    pass


class NotAffineInH(AtlasError):
    def __init__(self, defect):
        super().__init__(f"pullback is not an affine function of H (defect {defect})")
        self.defect = defect


class SmallDivisorZero(AtlasError):
    pass
