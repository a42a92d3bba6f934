"""GAS-GSM - Grover adaptive search simulator for generalized spatial modulation detection"""

__version__ = "1.0.0"
