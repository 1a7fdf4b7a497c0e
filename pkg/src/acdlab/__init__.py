"""Monte Carlo laboratory for almost-continuous diffusions, their time-change constructions and limit laws."""
from __future__ import annotations

__version__ = "0.1.0"
