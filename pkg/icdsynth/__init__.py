"""
icdsynth
~~~~~~~~

Synthesis of stealthy reprogramming attacks on an ICD rhythm discrimination
algorithm: a cycle-level discriminator simulator, a synthetic signal
generator, exact and random Pareto front search and an SMT-LIB2 back end.
"""

from .base import *
from .errors import *
from .config import *
from .parameters import *
from .signals import *
from .discriminator import *
from .evaluation import *
from .objectives import *
from .generator import *
from .synthesis import *
from .smt import *
from .reports import *
from .manifest import *
