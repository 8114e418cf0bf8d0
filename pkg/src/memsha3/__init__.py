"""In-memory SHA3 on a simulated 3D CMOS-memristor accelerator."""

__version__ = "0.1.0"
