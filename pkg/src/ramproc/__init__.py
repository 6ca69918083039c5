"""Process-algebra toolkit for register machine programs.

Compile sequential and parallel random-access machine programs into
recursive process terms, run them over bit-string memories, and compute
step-count measures of the resulting behaviors.
"""

__version__ = "0.1.0"
