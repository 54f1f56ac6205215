"""Back-end selection for the ray kernels.

The compiled extension (_core) is preferred when importable; _pycore is the
pure-Python fallback with identical semantics.  Set VOXELVIS_BACKEND=python
(or =compiled) in the environment to force one, or pass ``impl`` explicitly
where an operation accepts it.
"""

import os

from . import _pycore

try:
    from . import _core
except ImportError:  # pragma: no cover - depends on the build environment
    _core = None

_IMPLS = {"python": _pycore}
if _core is not None:
    _IMPLS["compiled"] = _core


def _default_name() -> str:
    forced = os.environ.get("VOXELVIS_BACKEND", "auto").lower()
    if forced in ("auto", ""):
        return "compiled" if _core is not None else "python"
    if forced not in ("python", "compiled"):
        raise ValueError(f"VOXELVIS_BACKEND must be auto, python, or compiled; got {forced!r}")
    return forced


BACKEND = _default_name()


def available() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def resolve(impl: str | None = None):
    """Return the kernel module for ``impl`` (None/'auto' = session default)."""
    name = BACKEND if impl in (None, "auto") else impl
    try:
        return _IMPLS[name]
    except KeyError:
        raise ValueError(
            f"kernel back end {name!r} unavailable; choices: {', '.join(available())}"
        ) from None
