"""Archivo __init__ para el paquete controllers."""
