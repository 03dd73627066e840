"""Completing and packing arc-disjoint arborescences and branchings with
bounds on root counts, with exact checkers and brute-force references."""
from .digraph import Digraph, ForestState, RootedInstance
from .errors import BranchpackError, CapacityError, ContractError, InputError
from .oracles import ViolationCertificate, verify_certificate

__all__ = [
    "Digraph", "ForestState", "RootedInstance", "ViolationCertificate",
    "verify_certificate", "BranchpackError", "CapacityError", "ContractError",
    "InputError",
]
__version__ = "0.1.0"
