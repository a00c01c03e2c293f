"""Cross-symmetric extensions, geometric discord and Bures entanglement for small bipartite systems."""
from .errors import CsentError
from .qmat import Layout
from .states import MultipartiteState

__all__ = ["CsentError", "Layout", "MultipartiteState"]
__version__ = "0.1.0"
