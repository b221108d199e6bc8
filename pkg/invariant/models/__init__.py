from .invariant_model import InvariantModel, InvariantFrame

__all__ = [
    'InvariantModel',
    'InvariantFrame'
]
