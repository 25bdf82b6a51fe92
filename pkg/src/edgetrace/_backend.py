"""Select the compiled kernel or its pure-Python twin.

Set ``EDGETRACE_PURE=1`` to force the interpreted kernels. ``load(pure)``
returns either variant explicitly, which the tests and the benchmark use to
compare them side by side.
"""
import importlib.util
import os
from pathlib import Path

_SRC = Path(__file__).with_name("_kernels.py")
_cache = {}


def _load_pure():
    spec = importlib.util.spec_from_file_location("edgetrace._kernels_py", _SRC)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def _load_compiled():
    from . import _kernels
    if getattr(_kernels, "__file__", "").endswith(".py"):
        return None
    return _kernels


def load(pure=None):
    """Return the kernel module; ``pure=None`` honours EDGETRACE_PURE."""
    if pure is None:
        pure = os.environ.get("EDGETRACE_PURE", "") == "1"
    key = "pure" if pure else "compiled"
    if key not in _cache:
        mod = None if pure else _load_compiled()
        if mod is None:
            mod = _cache.get("pure") or _load_pure()
            _cache["pure"] = mod
        _cache[key] = mod
    return _cache[key]


def is_compiled(mod):
    return not getattr(mod, "__file__", "").endswith(".py")


kernels = load()
COMPILED = is_compiled(kernels)
