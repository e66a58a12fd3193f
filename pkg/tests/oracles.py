"""Independent reference implementations used to freeze expected values.

These deliberately use brute-force formulations (direct summation,
direct convolution, dense FFT peak search) so they share no code with
the library paths they check.
"""

import numpy as np


def naive_dft(x, inverse=False):
    """O(N^2) direct-summation DFT."""
    x = np.asarray(x, dtype=np.complex128)
    n = len(x)
    k = np.arange(n)
    sign = 1.0 if inverse else -1.0
    kernel = np.exp(sign * 2j * np.pi * np.outer(k, k) / n)
    out = kernel @ x
    return out / n if inverse else out


def direct_fir(x, taps):
    """Plain linear convolution truncated to the input length."""
    return np.convolve(np.asarray(x), np.asarray(taps))[: len(x)]


def tone_peak(x, fs, pad_factor=8):
    """Frequency and amplitude of the dominant tone via zero-padded FFT.

    Parabolic interpolation on the log magnitude refines the peak to a
    small fraction of a bin.
    """
    x = np.asarray(x, dtype=np.complex128)
    n = len(x) * pad_factor
    win = np.hanning(len(x))
    spec = np.fft.fft(x * win, n)
    mag = np.abs(spec)
    k = int(np.argmax(mag))
    km, kp = (k - 1) % n, (k + 1) % n
    a, b, c = np.log(mag[km] + 1e-300), np.log(mag[k] + 1e-300), np.log(mag[kp] + 1e-300)
    denom = a - 2 * b + c
    frac = 0.5 * (a - c) / denom if abs(denom) > 1e-15 else 0.0
    freq = (k + frac) / n
    if freq > 0.5:
        freq -= 1.0
    amp = np.exp(b - 0.25 * (a - c) * frac)
    return freq * fs, amp


def psd_band_power(x, fs, f_lo, f_hi, nfft=4096):
    """Average power of a signal inside a frequency band.

    Hann-windowed averaged periodogram; the window keeps leakage from
    strong neighboring bands out of quiet ones.
    """
    x = np.asarray(x, dtype=np.complex128)
    win = np.hanning(nfft)
    norm = np.sum(win**2)
    nseg = len(x) // nfft
    acc = np.zeros(nfft)
    for i in range(nseg):
        seg = x[i * nfft : (i + 1) * nfft]
        acc += np.abs(np.fft.fft(seg * win)) ** 2
    acc /= max(nseg, 1) * norm * nfft
    freqs = np.fft.fftfreq(nfft, d=1.0 / fs)
    mask = (freqs >= f_lo) & (freqs <= f_hi)
    return float(np.sum(acc[mask]))


def ideal_fractional_delay(x, delay):
    """Delay a (periodic) stream by phase-ramping its full-length FFT."""
    x = np.asarray(x, dtype=np.complex128)
    n = len(x)
    f = np.fft.fftfreq(n)
    return np.fft.ifft(np.fft.fft(x) * np.exp(-2j * np.pi * f * delay))
