# -*- coding: utf-8 -*-

"""
icdsynth.smt.scope
~~~~~~~~~~~~~~~~~~

The Scope class, holding the interpretation of symbols while ground
formulas are evaluated.

Globals carry the parameter constants (and ``dist``), which stay fixed for
one grid point; locals carry the per-signal state variables, which are
filled in cycle by cycle and cleared between signals.
"""

import typing

__all__ = ("Scope",)

_MISSING = object()


class Scope:
    """
    Class that represents a global and local interpretation of SMT symbols.

    .. code:: python3

        scope = Scope({"VF_th": 300, "VFdur": 1000})  # parameters only

        scope.update_locals({"VFd_0_0": False, "tVF_0_0": 0})
        scope["tVF_0_0"]  # 0

    Locals shadow globals.
    """

    __slots__ = ("globals", "locals")

    def __init__(self, globals_: dict = None, locals_: dict = None):
        self.globals: dict = globals_ or {}
        self.locals: dict = locals_ or {}

    def __contains__(self, name: str) -> bool:
        return name in self.locals or name in self.globals

    def __getitem__(self, name: str):
        value = self.get(name, _MISSING)
        if value is _MISSING:
            raise KeyError(name)
        return value

    def get(self, name: str, default=None):
        if name in self.locals:
            return self.locals[name]
        return self.globals.get(name, default)

    def assign(self, name: str, value) -> typing.Any:
        """
        Binds a local, refusing to rebind it to a different value.

        Returns
        -------
        Any
            The value previously bound to ``name``, or the new value.

        Raises
        ------
        ValueError
            ``name`` is already bound to a different value.
        """

        current = self.get(name, _MISSING)
        if current is not _MISSING:
            if current != value:
                raise ValueError(f"{name} is both {current!r} and {value!r}")
            return current
        self.locals[name] = value
        return value

    def clear_locals(self):
        """
        Drops every local binding, keeping the globals.

        Returns
        -------
        Scope
            The updated scope (self).
        """

        self.locals.clear()
        return self

    def update_globals(self, other: dict):
        self.globals.update(other)
        return self

    def update_locals(self, other: dict):
        self.locals.update(other)
        return self
