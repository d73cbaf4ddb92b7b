"""Familias de estados consumidas por el oráculo QFI."""

from qlidar.families.base import StateFamily
from qlidar.families.single_entangled import SingleEntangledFamily
from qlidar.families.single_separable import SingleSeparableFamily
from qlidar.families.two_target_entangled import TwoTargetEntangledFamily
from qlidar.families.two_target_separable import TwoTargetSeparableFamily

__all__ = [
    "StateFamily",
    "SingleSeparableFamily",
    "SingleEntangledFamily",
    "TwoTargetSeparableFamily",
    "TwoTargetEntangledFamily",
]
