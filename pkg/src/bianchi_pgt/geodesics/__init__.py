"""Conjugacy classes of loxodromic elements in Bianchi groups."""

from .ledger import (COLUMNS, ConjClass, GeodesicLedger, enumerate_classes,
                     pi_gamma, pi_gamma_array, read_ledger, torsion_order,
                     write_ledger)
from .search import conjugacy_key, literal_root, primitive_root
from .torsion import torsion_generator

__all__ = [
    "COLUMNS", "ConjClass", "GeodesicLedger", "enumerate_classes", "pi_gamma",
    "pi_gamma_array", "read_ledger", "torsion_order", "write_ledger",
    "conjugacy_key", "literal_root", "primitive_root", "torsion_generator",
]
