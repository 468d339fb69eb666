"""Snapshot/restore support giving contract-style revert semantics."""
from __future__ import annotations

import copy
from contextlib import contextmanager


class Stateful:
    # Attribute names that point at other world objects; never copied.
    _refs: tuple[str, ...] = ()

    def snapshot(self) -> dict:
        return copy.deepcopy({k: v for k, v in vars(self).items() if k not in self._refs})

    def restore(self, snap: dict) -> None:
        vars(self).update(copy.deepcopy(snap))


@contextmanager
def atomic(*objs: Stateful):
    """Revert every object in ``objs`` if the body raises."""
    snaps = [o.snapshot() for o in objs]
    try:
        yield
    except BaseException:
        for obj, snap in zip(objs, snaps):
            obj.restore(snap)
        raise
