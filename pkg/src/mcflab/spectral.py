"""FFT helpers for periodic samples on the uniform angular grid."""

import numpy as np


def angular_grid(n):
    return 2.0 * np.pi * np.arange(n) / n


def dphi(values):
    """Spectral first derivative with respect to the angle."""
    n = len(values)
    k = np.fft.rfftfreq(n, d=1.0 / n)
    return np.fft.irfft(1j * k * np.fft.rfft(values), n)


def dphi2(values):
    """Spectral second derivative with respect to the angle."""
    n = len(values)
    k = np.fft.rfftfreq(n, d=1.0 / n)
    return np.fft.irfft(-(k ** 2) * np.fft.rfft(values), n)


def fourier_integrals(values):
    """(integral h cos(k phi) dphi, integral h sin(k phi) dphi) for k = 0..n/2."""
    n = len(values)
    coeff = np.fft.rfft(values)
    cos_int = 2.0 * np.pi / n * np.real(coeff)
    sin_int = -2.0 * np.pi / n * np.imag(coeff)
    return cos_int, sin_int
