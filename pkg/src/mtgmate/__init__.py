"""Forced Magic: the Gathering boards that run Turing machines.

Modules: ``engine`` (rules fragment), ``cards`` (card library), ``tm``
(reference interpreter and sentence tools), ``compiler`` (machines and
sentences to boards) and ``harness`` (forced runs, solver, bisimulation).
"""
__version__ = "0.1.0"
