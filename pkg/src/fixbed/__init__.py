"""fixbed: one-dimensional fixed-bed reactor simulation.

Transport balances in concentration/internal-energy form closed by
thermodynamic volume and internal-energy constraints; first-order upwind
finite volumes; Newton, pseudo-arclength continuation, and stiffly
accurate ESDIRK time integration.
"""

__version__ = "0.1.0"
