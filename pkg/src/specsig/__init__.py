"""Statistical signatures of audio collections.

Whole-track magnitude spectra are pooled into a weighted distribution over
frequency, seven candidate families are fitted by weighted maximum
likelihood, and the best fit under the Kolmogorov-Smirnov statistic is
reported together with its theoretical moments and a pitch histogram.
"""
from .audio import TrackAudio, BookManifest, load_wav, write_wav, load_manifest, downmix_stereo
from .spectral import Spectrum, dft_real, naive_dft
from .empirical import (WeightedEmpirical, from_spectra, ecdf_at, weighted_quantile,
                        weighted_moments)
from .distributions import Family, DistSpec, Moments, theoretical_moments, ALL_FAMILIES
from .fitting import (FitResult, RankedFits, SelectionReason, fit_mle, fit_all,
                      ks_statistic, ks_pvalue, effective_n, rank_and_select)
from .pitch import PitchBin, PitchHistogram, hz_to_pitch, histogram, octave_lines
from .reporting import BookReport, emit_moment_table, emit_fit_table, emit_histogram_svg
from .synth import SynthSpec, generate_track
from .pipeline import RunConfig

__version__ = "0.1.0"
