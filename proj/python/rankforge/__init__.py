"""Global ranking recovery from pairwise-comparison digraphs."""

try:
    from ._core import *  # noqa: F401,F403
    from . import _core as _impl
except ImportError:  # development tree: extension sits directly on sys.path
    from _core import *  # noqa: F401,F403
    import _core as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
__version__ = "0.1.0"
