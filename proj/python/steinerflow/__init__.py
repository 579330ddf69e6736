from ._steinerflow import *  # noqa: F401,F403
from ._steinerflow import __doc__, __version__  # noqa: F401
