"""qlidar: cotas cuánticas de precisión para lidar de rango y velocidad."""

__version__ = "0.1.0"
