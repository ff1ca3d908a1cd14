"""
Sets whatever is exposed in the `holobf` namespace.

Submodules are imported explicitly by callers, e.g. `from holobf import kernels`,
since several of them pull in sympy at import time.
"""

import importlib.metadata

try:
    __version__ = importlib.metadata.version("holobf")
except importlib.metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0+unknown"
