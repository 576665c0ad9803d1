"""Reconfigurable (time-multiplexed) feed-forward pathways.

A pathway holds R weight banks sharing one architecture; a gate vector
selects which bank (or blend of banks) runs. Control automata sequence the
gate, and the compound-classifier layer builds decision lists, trees,
ensembles, and style models on top. The learning module trains one bank at
a time, and the experiments module simulates priming/timing predictions.
"""

from .kernels import BACKEND
from .pathway import (FeedForwardNetwork, GateVector, MultiplexedPathway,
                      ShapeError, forward_multiplexed, forward_standalone,
                      load_pathway, make_one_hot, save_pathway)

__all__ = [
    "BACKEND",
    "FeedForwardNetwork",
    "GateVector",
    "MultiplexedPathway",
    "ShapeError",
    "forward_multiplexed",
    "forward_standalone",
    "load_pathway",
    "make_one_hot",
    "save_pathway",
]

__version__ = "0.1.0"
