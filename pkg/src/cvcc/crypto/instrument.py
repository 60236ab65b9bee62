"""Operation-count notifications.

Primitives call :func:`notify` for every counted operation.  The active
listener lives in a context variable, so primitives stay pure functions of
their inputs: the listener observes calls but never feeds back into them.
"""
from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from typing import Callable, Iterator

OP_KINDS = ("hash", "xor", "scalar_mul", "sign", "verify", "batch_verify")

Listener = Callable[[str, int], None]

_listener: ContextVar[Listener | None] = ContextVar("cvcc_op_listener", default=None)


def notify(kind: str, n: int = 1) -> None:
    listener = _listener.get()
    if listener is not None:
        listener(kind, n)


@contextmanager
def listening(listener: Listener) -> Iterator[None]:
    token = _listener.set(listener)
    try:
        yield
    finally:
        _listener.reset(token)
