"""Blind Capon beamformer: CaponICE extraction, ISR bounds and DOA baselines."""

from ._core import (
    BlindCaponError,
    __version__,
    capon_ice,
    contrast,
    contrast_derivative,
    crib_capon,
    crib_ice,
    extract,
    generate_mixture,
    mpdr_weights,
    output_sir,
    root_music,
    steering,
    tls_esprit,
)

__all__ = [
    "BlindCaponError",
    "capon_ice",
    "contrast",
    "contrast_derivative",
    "crib_capon",
    "crib_ice",
    "extract",
    "generate_mixture",
    "mpdr_weights",
    "output_sir",
    "root_music",
    "steering",
    "tls_esprit",
]
