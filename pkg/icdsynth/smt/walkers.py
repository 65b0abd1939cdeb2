# -*- coding: utf-8 -*-

"""
icdsynth.smt.walkers
~~~~~~~~~~~~~~~~~~~~

Formula walkers over the emitted encoding.

:class:`GroundEvaluator` computes the value of a formula once every symbol
in it has an interpretation in a :class:`~icdsynth.smt.scope.Scope`. It is
the miniature evaluator used to check emitted documents without an
external solver.
"""

from fractions import Fraction
from functools import reduce
from operator import mul

from pysmt.walkers import DagWalker

from .scope import Scope

__all__ = ("GroundEvaluator", "UnboundSymbol")

# pylint: disable=unused-argument,invalid-name,missing-docstring


class UnboundSymbol(KeyError):
    """A symbol was evaluated before anything gave it a value."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


class GroundEvaluator(DagWalker):
    """
    Evaluates ground formulas bottom-up.

    Results are memoized per formula node, so one evaluator must only be used
    with a scope whose bindings are never changed after being read (bindings
    may still be added). Create a new evaluator for every parameter point.
    """

    def __init__(self, scope: Scope, env=None):
        DagWalker.__init__(self, env=env)
        self.scope = scope

    def evaluate(self, formula):
        return self.walk(formula)

    def walk_symbol(self, formula, args, **kwargs):
        name = formula.symbol_name()
        try:
            return self.scope[name]
        except KeyError:
            raise UnboundSymbol(name) from None

    def walk_bool_constant(self, formula, args, **kwargs):
        return bool(formula.constant_value())

    def walk_int_constant(self, formula, args, **kwargs):
        return int(formula.constant_value())

    def walk_real_constant(self, formula, args, **kwargs):
        return Fraction(formula.constant_value())

    def walk_and(self, formula, args, **kwargs):
        return all(args)

    def walk_or(self, formula, args, **kwargs):
        return any(args)

    def walk_not(self, formula, args, **kwargs):
        return not args[0]

    def walk_implies(self, formula, args, **kwargs):
        return (not args[0]) or args[1]

    def walk_iff(self, formula, args, **kwargs):
        return bool(args[0]) == bool(args[1])

    def walk_ite(self, formula, args, **kwargs):
        return args[1] if args[0] else args[2]

    def walk_plus(self, formula, args, **kwargs):
        return sum(args)

    def walk_minus(self, formula, args, **kwargs):
        return args[0] - args[1]

    def walk_times(self, formula, args, **kwargs):
        return reduce(mul, args, 1)

    def walk_le(self, formula, args, **kwargs):
        return args[0] <= args[1]

    def walk_lt(self, formula, args, **kwargs):
        return args[0] < args[1]

    def walk_equals(self, formula, args, **kwargs):
        return args[0] == args[1]
