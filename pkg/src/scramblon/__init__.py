"""Operator-size dynamics in all-to-all Brownian spin circuits.

Submodules:

* core      distribution types and transforms
* brownian  large-N birth-death master equation and closed forms
* exact     brute-force oracles at small N
* seft      the parameter-free early-to-late consistency map
* mqc       multiple-quantum coherence spectra and predictions
* io        CSV/JSON artifact formats
* cli       command-line driver
"""

__version__ = "0.1.0"
