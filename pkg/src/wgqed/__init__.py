"""Master-equation simulation of dissipative entangled-state preparation in a waveguide-coupled qubit chain."""

__version__ = "0.1.0"
