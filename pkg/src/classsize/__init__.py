"""Optimal class sizes when a class's output falls with the chance of disruption."""
from .core import Instance, SolveResult, evaluate_output, evaluate_profit
from .errors import CapacityError, ImprovementNotGuaranteed, InvalidArgument, RootNotBracketed
from .multitype import AllocationMatrix, MultiTypeInstance, evaluate_multitype, solve_multitype_bruteforce
from .solver import solve_balanced, solve_bruteforce

__all__ = [
    "AllocationMatrix",
    "CapacityError",
    "ImprovementNotGuaranteed",
    "Instance",
    "InvalidArgument",
    "MultiTypeInstance",
    "RootNotBracketed",
    "SolveResult",
    "evaluate_multitype",
    "evaluate_output",
    "evaluate_profit",
    "solve_balanced",
    "solve_bruteforce",
    "solve_multitype_bruteforce",
]
