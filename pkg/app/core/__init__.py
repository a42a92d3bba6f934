"""
Core Simulation Logic
Polynomial algebra, GSM link model, MLD objective compilation, Grover adaptive search
and the two amplitude simulators.
"""
