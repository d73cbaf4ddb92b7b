"""Archivo __init__ para el paquete infra."""
