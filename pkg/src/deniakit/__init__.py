"""
Plausibly deniable communication over discrete memoryless broadcast channels.

The library modules (probkit, channel, zeroinfo, regions, codec, evalx) are
plain Python and need no Django setup; the `deniakit` management command and
console script drive them as reproducible batch runs.
"""

__version__ = "0.1.0"
