"""Hot-loop kernels, compiled when the extension is built.

The compiled module is picked at import; the pure-Python twin in
``_pykernels`` is used otherwise. Both produce identical results, so the
choice never changes simulation output, only speed. Set
``CONVERGELAB_NO_EXT=1`` to start on the pure-Python kernels.
"""

from __future__ import annotations

import os
from types import ModuleType

from convergelab import _pykernels

try:
    from convergelab import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_active: ModuleType = _compiled if _compiled is not None and not os.environ.get("CONVERGELAB_NO_EXT") else _pykernels


def backend() -> str:
    return _active.BACKEND


def compiled_available() -> bool:
    return _compiled is not None


def use_backend(name: str) -> None:
    """Switch kernels at runtime ("compiled" or "python"); used by benchmarks and tests."""
    global _active
    if name == "python":
        _active = _pykernels
    elif name == "compiled":
        if _compiled is None:
            raise RuntimeError("compiled kernels are not built")
        _active = _compiled
    else:
        raise ValueError(f"unknown backend {name!r}")


def scalar_mul_jacobian(k: int, x: int, y: int, a: int, p: int):
    if _active is _compiled and (p.bit_length() > 256 or k.bit_length() > 256 or not p & 1):
        return _pykernels.scalar_mul_jacobian(k, x, y, a, p)
    return _active.scalar_mul_jacobian(k, x, y, a, p)


def contention_slots(key: int, busy: float, cw_min: int, cw_max: int) -> tuple[int, int]:
    return _active.contention_slots(key & 0xFFFFFFFFFFFFFFFF, busy, cw_min, cw_max)


def splitmix_uniforms(key: int, count: int) -> list[float]:
    return _active.splitmix_uniforms(key & 0xFFFFFFFFFFFFFFFF, count)


def zoh_running_mean(times, values) -> list[float]:
    return _active.zoh_running_mean(times, values)
