"""Archivo __init__ para el paquete tests."""
