"""Exception types raised by qcpo_lab."""

import numpy as np


class NotHermitianError(ValueError):
    """Input that must be Hermitian deviates from its adjoint."""

    def __init__(self, deviation: float, message: str = None):
        self.deviation = float(deviation)
        super().__init__(message or f"matrix is not Hermitian (max |A - A^dag| = {self.deviation:.3e})")


class NotPositiveError(ValueError):
    """An operator required to be positive semidefinite has a negative eigenvalue.

    ``witness`` is a unit vector ``v`` with ``<v|H|v> == min_eigenvalue``.
    """

    def __init__(self, min_eigenvalue: float, witness: np.ndarray = None, message: str = None):
        self.min_eigenvalue = float(min_eigenvalue)
        self.witness = witness
        super().__init__(message or f"operator is not positive semidefinite (min eigenvalue {self.min_eigenvalue:.6e})")


class SingularError(ValueError):
    """An operator required to be strictly positive definite is (near) singular."""

    def __init__(self, min_eigenvalue: float, message: str = None):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(message or f"operator is not strictly positive definite (min eigenvalue {self.min_eigenvalue:.6e})")


class NotUnitalError(ValueError):
    """A map required to satisfy phi(I) = I does not."""

    def __init__(self, deviation: float, message: str = None):
        self.deviation = float(deviation)
        super().__init__(message or f"map is not unital (||phi(I) - I|| = {self.deviation:.3e})")
