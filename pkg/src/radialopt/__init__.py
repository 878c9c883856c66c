"""Radial epiderivatives and global optimality certificates for nonsmooth problems."""

__version__ = "0.1.0"
