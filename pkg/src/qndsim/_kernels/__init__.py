"""Jump-simulation kernels: compiled core with a pure-Python fallback.

The compiled extension is optional; when it failed to build (or was
disabled), the pure-Python twin takes over with bit-identical output. Both
consume the same uniform stream from a caller-supplied numpy Generator and
mirror each other's floating-point operation order exactly, so a given
seed produces the same event list on either backend.
"""

from . import _gillespie_py

try:  # compiled twin; absent on source-only installs
    from . import _gillespie

    BACKEND = "cython"
except ImportError:  # pragma: no cover - depends on build environment
    _gillespie = None
    BACKEND = "python"


def available_backends():
    names = ["python"]
    if _gillespie is not None:
        names.insert(0, "cython")
    return tuple(names)


def get_backend(name: str | None = None):
    """Kernel module by name; None selects the best available."""
    if name in (None, "auto"):
        return _gillespie if _gillespie is not None else _gillespie_py
    if name == "python":
        return _gillespie_py
    if name == "cython":
        if _gillespie is None:
            raise RuntimeError("compiled kernel is not available in this install")
        return _gillespie
    raise ValueError("unknown backend %r (use 'cython', 'python' or None)" % name)
