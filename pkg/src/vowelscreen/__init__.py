"""Vowel phonation analysis toolkit.

Extracts conventional (jitter, shimmer, HNR, GNE, formants, vowel-space
metrics) and perceptual (MFCC, LFCC, CMS, PLP, LPCC, ... ) acoustic features
from recorded vowels, reduces them with statistical functionals, screens them
against class labels and clinical scores, selects discriminative subsets
(mRMR + SFFS) and classifies with leave-one-out random forests.
"""

__version__ = "0.1.0"

from .errors import ConfigError, DataError, VowelscreenError

__all__ = ["ConfigError", "DataError", "VowelscreenError", "__version__"]
