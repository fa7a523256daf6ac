"""Askey-Wilson operator and Nevanlinna growth laboratory."""

__version__ = "0.1.0"
