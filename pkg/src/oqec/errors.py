"""Exception types raised across the package."""


class OQECError(Exception):
    """Base class for all package errors."""


class DimensionError(OQECError, ValueError):
    """Matrix shapes do not fit together."""


class NotHermitianError(OQECError, ValueError):
    pass


class NotProjectorError(OQECError, ValueError):
    pass


class NotUnitaryError(OQECError, ValueError):
    pass


class ChannelError(OQECError, ValueError):
    """Malformed Kraus list (empty, ragged, non-square)."""


class TracePreservationError(ChannelError):
    """Kraus operators fail sum E^dag E = I."""

    def __init__(self, residual: float, atol: float):
        self.residual = residual
        self.atol = atol
        super().__init__(
            f"Kraus operators are not trace preserving: "
            f"||sum E^dag E - I||_F = {residual:.3e} > atol = {atol:.1e}"
        )


class NotUnitalError(OQECError, ValueError):
    def __init__(self, residual: float, hint: str = ""):
        self.residual = residual
        msg = f"channel is not unital (||sum E E^dag - I||_F = {residual:.3e})"
        if hint:
            msg += f"; {hint}"
        super().__init__(msg)


class NotPSDError(OQECError, ValueError):
    pass


class ClosureError(OQECError, ValueError):
    """Operator space is missing the closure property an operation needs."""


class DegenerateStructureError(OQECError, RuntimeError):
    """Randomized block splitting hit a near-degenerate spectrum."""


class NotNoiselessError(OQECError, ValueError):
    pass


class NotCorrectableError(OQECError, ValueError):
    def __init__(self, residual: float, what: str = "decomposition"):
        self.residual = residual
        super().__init__(f"{what} is not correctable (residual {residual:.3e})")


class SynthesisError(OQECError, RuntimeError):
    """Recovery construction failed numerically or did not self-verify."""
