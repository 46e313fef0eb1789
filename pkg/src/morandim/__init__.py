"""morandim: Hausdorff dimensions of infinitely generated, non-stationary
Moran interval fractals, computed as zeros of a pressure function driven by
digit statistics of real numbers under m-ary, beta, continued-fraction,
Bolyai-Renyi and generic f-expansions."""

__version__ = "0.1.0"

from .algebraic import QuadraticIrrational, golden_ratio, sqrt2_minus_1
from .expansions import (
    MAry, Beta, ContinuedFraction, BolyaiRenyi, GenericF, FSpec,
    DigitSequence, DigitStats, expand, digit_stats, synthesize_quasinormal,
)
