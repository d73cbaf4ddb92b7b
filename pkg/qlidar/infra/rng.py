"""
Flujos aleatorios direccionables por contador.

Cada bloque de disparos obtiene su propio generador Philox a partir de
(seed, stream, trial, block), de modo que el resultado no depende del número
de procesos ni del orden de ejecución.
"""

from collections.abc import Iterator
from typing import Optional

import numpy as np

from qlidar.config import settings

# Índices de flujo reservados por tipo de simulación
STREAM_HADAMARD = 1
STREAM_JOINT = 2
STREAM_OUTCOMES = 3


def block_generator(
    seed: int, stream: int, block: int, trial: int = 0
) -> np.random.Generator:
    """
    Generador independiente para un bloque.

    Args:
        seed: Semilla de usuario (64 bits)
        stream: Índice de flujo (tipo de simulación)
        block: Índice de bloque dentro del flujo
        trial: Índice de ensayo en simulaciones repetidas

    Returns:
        numpy Generator sobre Philox
    """
    sequence = np.random.SeedSequence(
        entropy=seed, spawn_key=(stream, trial, block)
    )
    return np.random.Generator(np.random.Philox(sequence))


def iter_blocks(
    total: int, block_size: Optional[int] = None
) -> Iterator[tuple[int, int, int]]:
    """
    Divide `total` disparos en bloques de tamaño fijo.

    Yields:
        (índice de bloque, inicio, tamaño)
    """
    size = block_size or settings.shot_block_size
    start = 0
    block = 0
    while start < total:
        count = min(size, total - start)
        yield block, start, count
        start += count
        block += 1
