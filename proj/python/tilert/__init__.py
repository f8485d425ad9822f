# SPDX-FileCopyrightText: (c) 2026 tilert contributors
# SPDX-License-Identifier: Apache-2.0
"""Offline compiler and simulated tile-array inference runtime.

The heavy lifting lives in the ``_tilert`` extension; this package adds
one-shot conveniences on top of it.
"""

from tilert._tilert import (
    CompiledModel,
    Session,
    TilertError,
    build_image,
    compile_graph,
    compute_stats,
    crc32,
    decode_rcb,
    kernel_bench,
    transfer_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "CompiledModel",
    "Session",
    "TilertError",
    "build_image",
    "compile_graph",
    "compute_stats",
    "crc32",
    "decode_rcb",
    "infer",
    "kernel_bench",
    "transfer_sweep",
]


def infer(model, data, **session_kwargs):
    """One inference through a fresh session.

    ``data`` is the Input-class tensors concatenated in manifest order; the
    return value is the Output-class tensors concatenated in manifest order.
    Reuse a :class:`Session` when running the same model repeatedly.
    """
    return Session(model, **session_kwargs).run(data)
