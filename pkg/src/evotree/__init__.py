"""Evolves executable construction heuristics with a Monte Carlo search tree.

Candidate heuristics are short Python functions proposed by a language
model, scored on a fixed evaluation dataset, and organized in a tree whose
selection rule balances normalized quality against a decaying exploration
bonus.  Progressive widening keeps adding fresh siblings at well-visited
nodes so early generations can be revisited late in a run.
"""

__version__ = "0.1.0"
