"""Spectra, branches and exceptional points of PT-symmetric and alpha^2-dynamo operators."""

from ._core import *  # noqa: F401,F403
from ._core import SpectralError, __version__, run_cli  # noqa: F401
