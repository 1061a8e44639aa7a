"""Radio-network throughput lab.

Tools for studying how many nodes of a collision radio network can receive
a packet in one synchronous round, and what that implies for multi-message
broadcast: a seeded generator for class-structured bipartite instances, an
exact combinatorial analysis of per-round reception with certified
inequality chains, exhaustive and local-search maximization of round
receptions, and a broadcast simulator for routing and network-coding
policies.
"""

__version__ = "0.1.0"

from .errors import BudgetError, InputError

__all__ = ["BudgetError", "InputError", "__version__"]
