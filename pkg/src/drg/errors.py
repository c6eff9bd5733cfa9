"""Exception types shared across the library."""


class DomainError(ValueError):
    """A point left the chart of validity of the inverse retraction.

    On the sphere this means p.T @ u <= 0; the usual remedy is a smaller
    step size.
    """


class AntipodalError(ValueError):
    """Chordal midpoint undefined: u + v vanishes in some block."""


class CriticalPointError(ValueError):
    """The gradient underflows; the skew operator of Eq-type F = Omega grad H
    cannot be formed at (near-)critical points."""


class NonConvergence(RuntimeError):
    """Fixed-point iteration did not reach tolerance within the allowed
    number of sweeps; signals a too-large step size."""

    def __init__(self, iterations, residual):
        super().__init__(
            f"fixed point not converged after {iterations} sweeps "
            f"(residual {residual:.3e})"
        )
        self.iterations = iterations
        self.residual = residual
