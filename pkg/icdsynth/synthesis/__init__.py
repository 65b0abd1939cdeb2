"""
Pareto-optimal attack synthesis backends.
"""

from .config import *
from .exact import *
from .experiments import *
from .random_search import *
