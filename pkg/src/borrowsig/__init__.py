"""Usage signals for telling borrowed foreign words apart from code-mixing.

The package turns a language-tagged tweet corpus into per-word borrowing
scores (unique-user / tweet / phrase ratios), ranks candidate words, and
evaluates those rankings against human-elicited preference data.
"""

__version__ = "0.1.0"
