# SPDX-License-Identifier: Apache-2.0
"""Ray-aware supervision masks, class-balanced token sampling and ray
positional encodings over synthetic multi-camera + LiDAR scenes."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = _core_doc
