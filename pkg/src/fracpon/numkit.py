"""Foundation numerics: complex buffers, arbitrary-size DFT, RRC design,
overlap-save convolution, rational resampling, Lagrange interpolation.

Everything downstream (transmitter shaping, channel model, receiver
front-end) is built on these routines. All operations are pure functions
of their inputs and hold no shared state; internal precision is
complex128 / float64 throughout.

The DFT supports any composite size (the receiver front-end needs 250,
252 and 256): power-of-two lengths run an iterative radix-2 transform,
everything else goes through Bluestein's chirp-z reformulation on top of
the radix-2 kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.signal import firwin, kaiserord, upfirdn


def as_fraction(rate) -> Fraction:
    """Coerce an sps rate given as Fraction, int, or (num, den) tuple."""
    if isinstance(rate, Fraction):
        return rate
    if isinstance(rate, int):
        return Fraction(rate)
    if isinstance(rate, tuple) and len(rate) == 2:
        return Fraction(int(rate[0]), int(rate[1]))
    raise ValueError(f"rate must be Fraction, int or (num, den) tuple, got {rate!r}")


@dataclass
class ComplexBuf:
    """A finite complex sample stream with a declared rational sample rate.

    Parameters
    ----------
    data : ndarray
        Complex samples (any width; promoted to complex128 on use).
    rate_sps : Fraction
        Samples per symbol as a reduced positive rational.
    """

    data: np.ndarray
    rate_sps: Fraction = field(default_factory=lambda: Fraction(1))

    def __post_init__(self):
        self.data = np.asarray(self.data)
        self.rate_sps = as_fraction(self.rate_sps)
        if self.rate_sps <= 0:
            raise ValueError(f"rate_sps must be positive, got {self.rate_sps}")

    def __len__(self) -> int:
        return len(self.data)


@dataclass
class DualPolBlock:
    """A pair of complex sample streams (X/Y polarization) at a common rate."""

    x_pol: np.ndarray
    y_pol: np.ndarray
    rate_sps: Fraction = field(default_factory=lambda: Fraction(1))

    def __post_init__(self):
        self.x_pol = np.asarray(self.x_pol)
        self.y_pol = np.asarray(self.y_pol)
        self.rate_sps = as_fraction(self.rate_sps)
        if self.x_pol.shape != self.y_pol.shape:
            raise ValueError("x_pol and y_pol must have identical shape")
        if self.rate_sps <= 0:
            raise ValueError(f"rate_sps must be positive, got {self.rate_sps}")

    def __len__(self) -> int:
        return len(self.x_pol)

    def copy(self) -> "DualPolBlock":
        return DualPolBlock(self.x_pol.copy(), self.y_pol.copy(), self.rate_sps)


@dataclass(frozen=True)
class OverlapSaveConfig:
    """Block layout for overlap-save streaming convolution.

    ``overlap_rate`` (> 1) is the per-sample processing inflation
    N / (N - overlap): each block of N transformed samples yields only
    N - overlap new output samples.
    """

    dft_size: int
    overlap: int

    def __post_init__(self):
        if not (0 < self.overlap < self.dft_size):
            raise ValueError(
                f"need 0 < overlap < dft_size, got {self.overlap}/{self.dft_size}"
            )

    @property
    def hop(self) -> int:
        return self.dft_size - self.overlap

    @property
    def overlap_rate(self) -> Fraction:
        return Fraction(self.dft_size, self.dft_size - self.overlap)


# ---------------------------------------------------------------------------
# Arbitrary-size DFT (radix-2 + Bluestein)
# ---------------------------------------------------------------------------


@lru_cache(maxsize=64)
def _radix2_plan(n: int):
    """Bit-reversal permutation and per-stage twiddles for a radix-2 FFT."""
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    work = idx.copy()
    for _ in range(bits):
        rev = (rev << 1) | (work & 1)
        work >>= 1
    twiddles = []
    half = 1
    while half < n:
        twiddles.append(np.exp(-1j * np.pi * np.arange(half) / half))
        half *= 2
    return rev, twiddles


def _fft_pow2(a: np.ndarray) -> np.ndarray:
    """Iterative radix-2 FFT along the last axis (length must be 2**k)."""
    n = a.shape[-1]
    if n == 1:
        return a.astype(np.complex128, copy=True)
    rev, twiddles = _radix2_plan(n)
    x = a[..., rev].astype(np.complex128, copy=False)
    batch = x.shape[:-1]
    half = 1
    for tw in twiddles:
        x = x.reshape(*batch, n // (2 * half), 2, half)
        even = x[..., 0, :]
        odd = x[..., 1, :] * tw
        x = np.concatenate((even + odd, even - odd), axis=-1)
        x = x.reshape(*batch, n)
        half *= 2
    return x


@lru_cache(maxsize=64)
def _bluestein_plan(n: int):
    """Chirp and precomputed chirp-filter spectrum for Bluestein's algorithm."""
    m = 1 << (2 * n - 1).bit_length()
    k = np.arange(n)
    chirp = np.exp(-1j * np.pi * (k * k % (2 * n)) / n)
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = np.conj(chirp)
    if n > 1:
        b[-(n - 1):] = np.conj(chirp[1:])[::-1]
    return m, chirp, _fft_pow2(b)


def _dft_any(a: np.ndarray) -> np.ndarray:
    """Forward DFT of arbitrary length along the last axis."""
    n = a.shape[-1]
    if n & (n - 1) == 0:
        return _fft_pow2(a)
    m, chirp, b_spec = _bluestein_plan(n)
    buf = np.zeros(a.shape[:-1] + (m,), dtype=np.complex128)
    buf[..., :n] = a * chirp
    conv = _fft_pow2(_fft_pow2(buf) * b_spec)[..., ::-1]
    # inverse FFT of length m via spectral reversal: ifft(X) = fft(X)[::-1]/m
    conv = np.roll(conv, 1, axis=-1) / m
    return conv[..., :n] * chirp


def dft(x, size: int | None = None, *, inverse: bool = False):
    """Discrete Fourier transform of any composite size.

    Forward kernel is exp(-j 2 pi k n / N); the inverse is scaled by 1/N
    so that ``dft(dft(x), inverse=True)`` round-trips.

    Parameters
    ----------
    x : ComplexBuf or ndarray
        Input of length ``size`` (batched inputs transform the last axis).
    size : int, optional
        Expected transform length (>= 2); defaults to the input length.
    inverse : bool
        Compute the inverse transform.

    Returns
    -------
    Same container type as the input (ComplexBuf in, ComplexBuf out).
    """
    buf = None
    if isinstance(x, ComplexBuf):
        buf = x
        a = np.asarray(x.data)
    else:
        a = np.asarray(x)
    n = a.shape[-1]
    if size is None:
        size = n
    if size < 2:
        raise ValueError(f"dft size must be >= 2, got {size}")
    if n != size:
        raise ValueError(f"input length {n} does not match dft size {size}")
    a = a.astype(np.complex128, copy=False)
    if inverse:
        out = np.conj(_dft_any(np.conj(a))) / size
    else:
        out = _dft_any(a)
    if buf is not None:
        return ComplexBuf(out, buf.rate_sps)
    return out


def idft(x, size: int | None = None):
    """Convenience wrapper for the inverse transform."""
    return dft(x, size, inverse=True)


# ---------------------------------------------------------------------------
# Root-raised-cosine design
# ---------------------------------------------------------------------------


def _rrc_impulse(t: np.ndarray, beta: float) -> np.ndarray:
    """RRC impulse response at symbol-period-normalized times ``t``.

    The removable singularities at t = 0 and |t| = 1/(4 beta) are
    evaluated by their analytic limits so the taps are bit-stable.
    """
    out = np.empty_like(t, dtype=np.float64)
    if beta == 0.0:
        return np.sinc(t)
    at_zero = t == 0.0
    at_sing = np.abs(np.abs(t) - 1.0 / (4.0 * beta)) < 1e-12
    regular = ~(at_zero | at_sing)

    out[at_zero] = 1.0 - beta + 4.0 * beta / np.pi
    if np.any(at_sing):
        s = np.pi / (4.0 * beta)
        out[at_sing] = (beta / math.sqrt(2.0)) * (
            (1.0 + 2.0 / np.pi) * math.sin(s) + (1.0 - 2.0 / np.pi) * math.cos(s)
        )
    tr = t[regular]
    num = np.sin(np.pi * tr * (1.0 - beta)) + 4.0 * beta * tr * np.cos(
        np.pi * tr * (1.0 + beta)
    )
    den = np.pi * tr * (1.0 - (4.0 * beta * tr) ** 2)
    out[regular] = num / den
    return out


def rrc_taps(beta: float, sps, span_symbols: int) -> np.ndarray:
    """Root-raised-cosine FIR taps at a rational samples-per-symbol rate.

    Returns an odd-length, exactly symmetric tap vector normalized to
    unit energy. ``sps`` may be fractional (e.g. 9/8); taps are the
    continuous impulse response sampled at multiples of 1/sps symbols.

    Parameters
    ----------
    beta : float
        Roll-off factor in [0, 1].
    sps : Fraction, int or (num, den)
        Samples per symbol, >= 1.
    span_symbols : int
        Even total span of the filter in symbol periods.
    """
    if not (0.0 <= beta <= 1.0):
        raise ValueError(f"roll-off must be in [0, 1], got {beta}")
    rate = as_fraction(sps)
    if rate < 1:
        raise ValueError(f"sps must be >= 1, got {rate}")
    if span_symbols <= 0 or span_symbols % 2:
        raise ValueError(f"span_symbols must be positive and even, got {span_symbols}")
    half = int(span_symbols * rate) // 2
    i = np.arange(half + 1, dtype=np.float64)
    t = i * float(1 / rate)
    right = _rrc_impulse(t, beta)
    taps = np.concatenate((right[:0:-1], right))  # mirror for exact symmetry
    return taps / math.sqrt(float(np.sum(taps * taps)))


# ---------------------------------------------------------------------------
# Overlap-save convolution
# ---------------------------------------------------------------------------


def fd_kernel_from_taps(taps: np.ndarray, dft_size: int, center: int = 0) -> np.ndarray:
    """Frequency-domain kernel for overlap-save from time-domain taps.

    ``center`` marks which tap index corresponds to zero delay: taps are
    placed circularly so tap ``center`` falls at time index 0. The
    overlap-save output then carries a delay of ``len(taps)-1-center``...
    with ``center=0`` the kernel is causal and the output is delay-free
    relative to direct ``convolve(x, taps)[0:len(x)]`` semantics.
    """
    taps = np.asarray(taps, dtype=np.complex128)
    if len(taps) > dft_size:
        raise ValueError(f"kernel of {len(taps)} taps does not fit dft size {dft_size}")
    td = np.zeros(dft_size, dtype=np.complex128)
    td[: len(taps)] = taps
    if center:
        td = np.roll(td, -center)
    return dft(td)


def overlap_save(x, cfg: OverlapSaveConfig, fd_kernel) -> np.ndarray:
    """Streaming linear convolution via overlap-save block processing.

    Equivalent to FIR filtering by the time-domain kernel on every
    steady-state sample, provided the (causal) kernel spans at most
    ``cfg.overlap + 1`` taps. Blocks advance by ``dft_size - overlap``;
    the first ``overlap`` samples of every transformed block are
    discarded. Output has the same length as the input.
    """
    data = x.data if isinstance(x, ComplexBuf) else np.asarray(x)
    kern = fd_kernel.data if isinstance(fd_kernel, ComplexBuf) else np.asarray(fd_kernel)
    n, ov = cfg.dft_size, cfg.overlap
    if len(kern) != n:
        raise ValueError(f"fd_kernel length {len(kern)} != dft size {n}")
    if len(data) <= n:
        raise ValueError(f"input length {len(data)} must exceed dft size {n}")
    hop = cfg.hop
    nblocks = -(-len(data) // hop)
    padded = np.zeros(ov + nblocks * hop, dtype=np.complex128)
    padded[ov : ov + len(data)] = data
    stride = padded.strides[0]
    blocks = np.lib.stride_tricks.as_strided(
        padded, shape=(nblocks, n), strides=(hop * stride, stride)
    )
    out_blocks = dft(dft(blocks) * kern, inverse=True)[:, ov:]
    out = out_blocks.reshape(-1)[: len(data)]
    if isinstance(x, ComplexBuf):
        return ComplexBuf(out, x.rate_sps)
    return out


# ---------------------------------------------------------------------------
# Rational resampling
# ---------------------------------------------------------------------------


def resample_rational(x, up: int, down: int, *, passband_frac: float = 0.9,
                      atten_db: float = 60.0):
    """Resample by the rational factor up/down with anti-alias filtering.

    The polyphase lowpass is a Kaiser-windowed FIR whose passband edge
    sits at ``passband_frac`` of the smaller Nyquist frequency and whose
    stopband starts symmetrically above it, so spectral content inside
    the passband is preserved in frequency and amplitude. Output length
    is ``floor(len(x) * up / down)`` with group delay compensated.

    Parameters
    ----------
    x : ComplexBuf or ndarray
    up, down : int
        Positive resampling ratio (reduced internally).
    passband_frac : float
        Passband edge relative to min(input, output) Nyquist; raise it
        (e.g. 0.97) for signals that fill nearly the whole output band,
        at the price of a longer filter.
    atten_db : float
        Stopband attenuation target for the Kaiser design.
    """
    buf = x if isinstance(x, ComplexBuf) else None
    data = np.asarray(buf.data if buf is not None else x, dtype=np.complex128)
    if up <= 0 or down <= 0:
        raise ValueError(f"up and down must be positive, got {up}/{down}")
    if not (0.0 < passband_frac < 1.0):
        raise ValueError(f"passband_frac must be in (0, 1), got {passband_frac}")
    g = math.gcd(up, down)
    up, down = up // g, down // g
    new_rate = (buf.rate_sps if buf is not None else Fraction(1)) * Fraction(up, down)
    if up == down:
        out = data.copy()
        return ComplexBuf(out, new_rate) if buf is not None else out

    # All frequencies below are in units of the input sample rate.
    f_half = min(1.0, up / down) / 2.0
    f_pass = passband_frac * f_half
    f_stop = (2.0 - passband_frac) * f_half
    width_norm = (f_stop - f_pass) / (up / 2.0)  # relative to design Nyquist
    numtaps, kaiser_beta = kaiserord(atten_db, width_norm)
    numtaps = int(numtaps)
    if numtaps % 2 == 0:
        numtaps += 1
    # force an integer output-grid group delay: (numtaps-1)/2 divisible by down
    while ((numtaps - 1) // 2) % down:
        numtaps += 2
    h = firwin(numtaps, (f_pass + f_stop) / 2.0, window=("kaiser", kaiser_beta), fs=float(up))
    y = upfirdn(h * up, data, up=up, down=down)
    start = (numtaps - 1) // 2 // down
    out_len = len(data) * up // down
    if len(y) < start + out_len:
        y = np.concatenate((y, np.zeros(start + out_len - len(y), dtype=y.dtype)))
    out = y[start : start + out_len]
    return ComplexBuf(out, new_rate) if buf is not None else out


# ---------------------------------------------------------------------------
# Lagrange fractional-delay weights
# ---------------------------------------------------------------------------


def lagrange_weights(mu, half_len: int) -> np.ndarray:
    """Lagrange basis weights over the integer node grid [-L, L].

    ``lagrange_weights(mu, L)[..., L + i]`` is the coefficient of the
    sample at node ``i`` when evaluating the interpolating polynomial at
    position ``mu``; used as FIR taps ``h[i] = w[L + i]`` with
    ``y[n] = sum_i h[i] x[n - i]`` the filter delays by ``mu`` samples.
    Weights sum to exactly 1 in exact arithmetic for any ``mu``.

    Parameters
    ----------
    mu : float or ndarray
        Evaluation position(s) in samples, typically in [0, 1).
    half_len : int
        L >= 0; the filter has 2 L + 1 taps. L = 0 returns the unit weight.
    """
    if half_len < 0:
        raise ValueError(f"half_len must be >= 0, got {half_len}")
    mu_arr = np.asarray(mu, dtype=np.float64)
    nodes = np.arange(-half_len, half_len + 1, dtype=np.float64)
    ntaps = 2 * half_len + 1
    w = np.ones(mu_arr.shape + (ntaps,), dtype=np.float64)
    for j in range(ntaps):
        for m in range(ntaps):
            if m != j:
                w[..., j] *= (mu_arr - nodes[m]) / (nodes[j] - nodes[m])
    return w


def fractional_delay(x: np.ndarray, delay: float, half_len: int = 8) -> np.ndarray:
    """Delay a stream by a non-integer number of samples (Lagrange FIR).

    The integer part shifts indices; the fractional remainder is
    interpolated with a (2 half_len + 1)-tap Lagrange filter. Samples
    beyond the edges are taken as zero; output length equals input.
    """
    data = np.asarray(x, dtype=np.complex128)
    n_int = math.floor(delay)
    mu = delay - n_int
    if mu == 0.0 and half_len >= 0:
        out = np.zeros_like(data)
        if n_int >= 0:
            out[n_int:] = data[: len(data) - n_int] if n_int else data
        else:
            out[:n_int] = data[-n_int:]
        return out
    w = lagrange_weights(mu, half_len)
    pad = half_len + abs(n_int) + 1
    ext = np.concatenate((np.zeros(pad, data.dtype), data, np.zeros(pad, data.dtype)))
    idx = np.arange(len(data)) + pad - n_int
    out = np.zeros(len(data), dtype=np.complex128)
    for k, i in enumerate(range(-half_len, half_len + 1)):
        out += w[k] * ext[idx - i]
    return out
