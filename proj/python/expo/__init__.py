"""Python interface to the expo training library."""

from expo._core import *  # noqa: F401,F403
from expo._core import __doc__ as _core_doc  # noqa: F401
