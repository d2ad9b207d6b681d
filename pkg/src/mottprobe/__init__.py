"""Exact-diagonalization probe of Mott lobes through the AC Josephson current
between two weakly coupled Bose-Hubbard lattices."""

__version__ = "0.1.0"
