"""Multiple-active spatial modulation over MIMO channels: encoding, RLS-family
detection (box-LASSO, classic LASSO, exhaustive l0/MAP), and the asymptotic
decoupled fixed-point analysis used to predict distortion and tune regularizers.
"""

from smrls.constellation import Constellation, ssk, bpsk, qam4
from smrls.codebook import SmCodebook, index_bits, build_codebook, encode, decode_hard
from smrls.rate import RateBounds, per_antenna_rate
from smrls.channel import (
    ChannelRealization,
    SpectralModel,
    ExperimentConfig,
    sample_rayleigh,
    add_awgn,
    rayleigh_r_transform,
)

__version__ = "0.1.0"
