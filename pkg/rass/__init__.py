"""Risk-averse self-scheduling of energy storage against uncertain real-time prices."""
from __future__ import annotations

__version__ = "0.1.0"

__all__ = ["__version__"]
