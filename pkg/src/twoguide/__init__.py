"""Two coupled waveguides: transverse tunnelling, phase gradient and Bohmian flow."""
__version__ = "0.1.0"
