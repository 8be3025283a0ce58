"""Warning categories and exceptions shared across the package."""


class FresnelTomoWarning(UserWarning):
    """Base class for numerical-quality warnings."""


class TruncationWarning(FresnelTomoWarning):
    """A Fock-space truncation is too small for the requested quantity."""


class GridExtentWarning(FresnelTomoWarning):
    """A wavefunction or Wigner grid does not contain the relevant support."""


class AngleCoverageWarning(FresnelTomoWarning):
    """Tomogram angles do not sample [0, pi) uniformly."""


class QuadratureError(RuntimeError):
    """A quadrature failed to reach its requested tolerance."""
