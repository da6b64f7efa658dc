"""Spectral toolkit for the cubic Schrödinger equation on Dirichlet domains.

Modules
-------
basis      Dirichlet eigenbases (cube, ball), synthesis and analysis.
spectral   Littlewood–Paley bands, Besov and Sobolev norms.
flow       Linear and split-step nonlinear evolution, conserved quantities.
virial     Directional interaction functionals and their time derivatives.
estimates  Bilinear, Strichartz-type and trace estimates, ratio scans.
driver     Log-Sobolev inequality checks and global continuation.
io         Deterministic CSV/JSON output and field snapshots.
cli        ``dnls`` command-line front end.
"""

__version__ = "0.1.0"
