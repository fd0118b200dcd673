"""Character attribute inference and evaluation core."""

try:
    from ._svocal import *  # noqa: F401,F403
except ImportError:
    # Build-tree layout: the extension sits next to this package on the path.
    from _svocal import *  # noqa: F401,F403
