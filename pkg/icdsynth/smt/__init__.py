# -*- coding: utf-8 -*-

"""
icdsynth.smt
~~~~~~~~~~~~

Solver-facing plumbing: formula emission, ground evaluation, output
decoding and the external solver process.
"""

from .decode import *
from .encoding import *
from .scope import *
from .sexpr import *
from .shell import *
from .solver import *
from .walkers import *
