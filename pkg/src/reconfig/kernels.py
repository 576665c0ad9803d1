"""Forward-kernel selection: compiled extension if built, numpy fallback otherwise.

Set RECONFIG_BACKEND=python to force the fallback even when the extension
is available.
"""

import os

from . import _pyforward

if os.environ.get("RECONFIG_BACKEND", "").lower() == "python":
    _impl = _pyforward
else:
    try:
        from . import _fastforward as _impl
    except ImportError:
        _impl = _pyforward

BACKEND = _impl.BACKEND
forward = _impl.forward
forward_collect = _impl.forward_collect
