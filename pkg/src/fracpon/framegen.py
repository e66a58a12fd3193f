"""Transmitter: 16QAM mapping, frame construction, pulse shaping, and
digital subcarrier multiplexing.

One frame carries, per polarization:

    [ tone TS | sync TS (repeats x base block) | payload with pilots ]

The tone TS is the band-edge alternation used for frame detection,
coarse frequency estimation and timing-phase initialization; the sync TS
is a periodic pseudorandom QPSK block used for frame synchronization and
fine frequency estimation; QPSK pilots are spread evenly through the
payload region for carrier phase recovery. A frame is fully determined
by (layout, seed, payload bits) and can be regenerated bit-identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import upfirdn

from .numkit import DualPolBlock, as_fraction, rrc_taps

# Gray-coded 4-level PAM rail: bit pair -> level (unnormalized)
_PAM4_LEVELS = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}
_QAM16_SCALE = 1.0 / math.sqrt(10.0)  # unit mean power over the alphabet

_QAM16_POINTS = np.array(
    [
        (_PAM4_LEVELS[(b0, b1)] + 1j * _PAM4_LEVELS[(b2, b3)]) * _QAM16_SCALE
        for b0 in (0, 1)
        for b1 in (0, 1)
        for b2 in (0, 1)
        for b3 in (0, 1)
    ]
)

_QPSK_POINTS = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j]) / math.sqrt(2.0)


def map_16qam(bits) -> np.ndarray:
    """Map bits (4 per symbol) to Gray-coded square 16QAM at unit mean power."""
    bits = np.asarray(bits, dtype=np.int64).ravel()
    if len(bits) % 4:
        raise ValueError(f"bit count must be divisible by 4, got {len(bits)}")
    groups = bits.reshape(-1, 4)
    idx = groups[:, 0] * 8 + groups[:, 1] * 4 + groups[:, 2] * 2 + groups[:, 3]
    return _QAM16_POINTS[idx]


def demap_16qam(symbols) -> np.ndarray:
    """Hard-decision demap to bits; exact inverse of :func:`map_16qam`."""
    symbols = np.asarray(symbols)
    idx = np.argmin(
        np.abs(symbols[:, None] - _QAM16_POINTS[None, :]), axis=1
    )
    bits = ((idx[:, None] >> np.array([3, 2, 1, 0])) & 1).astype(np.int64)
    return bits.ravel()


def decide_16qam(symbols) -> np.ndarray:
    """Nearest 16QAM constellation point (per-rail slicing)."""
    s = np.asarray(symbols) / _QAM16_SCALE
    re = np.clip(2.0 * np.round((np.real(s) + 3.0) / 2.0) - 3.0, -3.0, 3.0)
    im = np.clip(2.0 * np.round((np.imag(s) + 3.0) / 2.0) - 3.0, -3.0, 3.0)
    return (re + 1j * im) * _QAM16_SCALE


def qam16_alphabet() -> np.ndarray:
    return _QAM16_POINTS.copy()


@dataclass(frozen=True)
class FrameLayout:
    """Positions and lengths of the sections inside one frame.

    The training prefix splits into ``ts_tone_len`` tone symbols followed
    by ``ts_sync_repeats`` copies of an ``ts_sync_period``-symbol block;
    ``pilot_count`` pilots are spread on an arithmetic grid through the
    remaining data region.
    """

    total_symbols: int = 9137
    ts_tone_len: int = 224
    ts_sync_period: int = 64
    ts_sync_repeats: int = 3
    pilot_count: int = 273

    def __post_init__(self):
        if self.ts_tone_len % 2:
            raise ValueError("ts_tone_len must be even")
        if self.ts_sync_repeats < 3:
            raise ValueError("ts_sync_repeats must be >= 3")
        if self.ts_sync_period < 16:
            raise ValueError("ts_sync_period must be >= 16")
        if self.payload_len <= 0:
            raise ValueError("layout leaves no room for payload")
        if self.pilot_count > 0 and self.pilot_spacing < 2:
            raise ValueError("pilots denser than every other symbol")

    @property
    def ts_total(self) -> int:
        return self.ts_tone_len + self.ts_sync_period * self.ts_sync_repeats

    @property
    def data_region_len(self) -> int:
        """Symbols after the training prefix (payload plus pilots)."""
        return self.total_symbols - self.ts_total

    @property
    def payload_len(self) -> int:
        return self.data_region_len - self.pilot_count

    @property
    def pilot_spacing(self) -> int:
        if self.pilot_count == 0:
            return 0
        return (self.payload_len + self.pilot_count) // self.pilot_count

    def pilot_positions(self) -> np.ndarray:
        """Pilot indices within the data region (frame index - ts_total)."""
        if self.pilot_count == 0:
            return np.array([], dtype=np.int64)
        span = (self.pilot_count - 1) * self.pilot_spacing
        offset = (self.data_region_len - 1 - span) // 2
        return offset + self.pilot_spacing * np.arange(self.pilot_count)

    @property
    def payload_bits_per_pol(self) -> int:
        return 4 * self.payload_len


@dataclass(frozen=True)
class DscmPlan:
    """Subcarrier grid for digital subcarrier multiplexing."""

    n_subcarriers: int = 8
    baud_per_sc: float = 8e9
    sc_spacing: float = 9e9
    power_vector: tuple = ()
    roll_off: float = 0.1

    def __post_init__(self):
        if self.n_subcarriers < 1:
            raise ValueError("need at least one subcarrier")
        if self.sc_spacing < self.baud_per_sc * (1.0 + self.roll_off) - 1e-9:
            raise ValueError(
                "sc_spacing below (1 + roll_off) x baud: subcarrier spectra overlap"
            )
        pv = self.power_vector or tuple([1.0] * self.n_subcarriers)
        if len(pv) != self.n_subcarriers:
            raise ValueError("power_vector length must equal n_subcarriers")
        if any(p <= 0 for p in pv):
            raise ValueError("power_vector entries must be positive")
        object.__setattr__(self, "power_vector", tuple(float(p) for p in pv))

    def center_freqs(self) -> np.ndarray:
        i = np.arange(self.n_subcarriers)
        return (i - (self.n_subcarriers - 1) / 2.0) * self.sc_spacing


@dataclass
class SymbolFrame:
    """One frame of 1 sps symbols for both polarizations plus source bits."""

    x_pol: np.ndarray
    y_pol: np.ndarray
    layout: FrameLayout
    bits_x: np.ndarray
    bits_y: np.ndarray
    seed: int

    def __post_init__(self):
        if len(self.x_pol) != self.layout.total_symbols:
            raise ValueError("x_pol length does not match layout")
        if len(self.y_pol) != self.layout.total_symbols:
            raise ValueError("y_pol length does not match layout")

    def pol(self, which: str) -> np.ndarray:
        return self.x_pol if which == "x" else self.y_pol


def gen_tone_ts(length: int) -> np.ndarray:
    """Band-edge tone training sequence: the alternating +1/-1 pattern.

    At 1 sps the alternation is the only sequence whose spectral energy
    sits at +-(symbol rate)/2; it is constant-modulus by construction.
    """
    if length % 2:
        raise ValueError(f"tone TS length must be even, got {length}")
    s = np.ones(length, dtype=np.complex128)
    s[1::2] = -1.0
    return s


def _qpsk_from_rng(rng: np.random.Generator, n: int) -> np.ndarray:
    return _QPSK_POINTS[rng.integers(0, 4, size=n)]


def _circular_autocorr_ok(s: np.ndarray, limit: float = 0.3) -> bool:
    spec = np.fft.fft(s)
    ac = np.fft.ifft(spec * np.conj(spec))
    peak = np.abs(ac[0])
    return bool(np.max(np.abs(ac[1:])) < limit * peak)


def gen_sync_ts(period: int, repeats: int, seed: int) -> np.ndarray:
    """Periodic pseudorandom QPSK training sequence.

    A base block of ``period`` symbols is drawn from a seeded generator
    and repeated ``repeats`` times. Candidate blocks whose circular
    autocorrelation sidelobes exceed 0.3 of the peak are rejected and the
    next draw is taken, so the result is still deterministic in ``seed``.
    """
    if period < 16:
        raise ValueError(f"sync TS period must be >= 16, got {period}")
    if repeats < 3:
        raise ValueError(f"sync TS repeats must be >= 3, got {repeats}")
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    for _ in range(64):
        base = _qpsk_from_rng(rng, period)
        if _circular_autocorr_ok(base):
            return np.tile(base, repeats)
    raise RuntimeError("no acceptable sync base block found in 64 draws")


def sync_base_block(layout: FrameLayout, seed: int, pol: str) -> np.ndarray:
    """The known sync base block S for one polarization."""
    full = gen_sync_ts(
        layout.ts_sync_period, layout.ts_sync_repeats, _pol_seed(seed, pol, "sync")
    )
    return full[: layout.ts_sync_period]


def _pol_seed(seed: int, pol: str, what: str) -> int:
    tag = {("x", "sync"): 11, ("y", "sync"): 12, ("x", "pilot"): 21, ("y", "pilot"): 22}
    return (seed << 5) + tag[(pol, what)]


def pilot_values(layout: FrameLayout, seed: int, pol: str) -> np.ndarray:
    """Known QPSK pilot symbols for one polarization."""
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=_pol_seed(seed, pol, "pilot"))
    )
    return _qpsk_from_rng(rng, layout.pilot_count)


def build_frame(layout: FrameLayout, bits_x, bits_y, seed: int) -> SymbolFrame:
    """Assemble one dual-polarization frame from payload bits.

    The tone TS is identical on both polarizations; sync TS and pilots
    are drawn independently per polarization (seeded from ``seed``) so
    the 2x2 channel stays identifiable during training.
    """
    bits_x = np.asarray(bits_x, dtype=np.int64).ravel()
    bits_y = np.asarray(bits_y, dtype=np.int64).ravel()
    need = layout.payload_bits_per_pol
    if len(bits_x) != need or len(bits_y) != need:
        raise ValueError(
            f"payload needs exactly {need} bits per polarization, "
            f"got {len(bits_x)}/{len(bits_y)}"
        )
    tone = gen_tone_ts(layout.ts_tone_len)
    pols = {}
    for pol, bits in (("x", bits_x), ("y", bits_y)):
        sync = gen_sync_ts(
            layout.ts_sync_period, layout.ts_sync_repeats, _pol_seed(seed, pol, "sync")
        )
        payload = map_16qam(bits)
        data = np.zeros(layout.data_region_len, dtype=np.complex128)
        ppos = layout.pilot_positions()
        mask = np.zeros(layout.data_region_len, dtype=bool)
        mask[ppos] = True
        data[mask] = pilot_values(layout, seed, pol)
        data[~mask] = payload
        pols[pol] = np.concatenate((tone, sync, data))
    return SymbolFrame(pols["x"], pols["y"], layout, bits_x, bits_y, seed)


def payload_mask(layout: FrameLayout) -> np.ndarray:
    """Boolean mask over the data region: True where payload (not pilot)."""
    mask = np.ones(layout.data_region_len, dtype=bool)
    mask[layout.pilot_positions()] = False
    return mask


def random_payload_bits(layout: FrameLayout, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded payload bits for both polarizations."""
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(7,)))
    n = layout.payload_bits_per_pol
    return rng.integers(0, 2, size=n), rng.integers(0, 2, size=n)


# ---------------------------------------------------------------------------
# Pulse shaping and subcarrier multiplexing
# ---------------------------------------------------------------------------


def shape_symbols(symbols: np.ndarray, sps, beta: float, span_symbols: int = 32,
                  taps: np.ndarray | None = None) -> np.ndarray:
    """RRC pulse shaping to ``sps`` samples per symbol (power preserving).

    With unit-energy taps and the sqrt(sps) gain applied here the shaped
    stream keeps the mean power of the symbol sequence. The filter group
    delay is trimmed so output sample ``n * sps`` corresponds to symbol n.
    """
    rate = as_fraction(sps)
    if rate.denominator != 1:
        raise ValueError("TX shaping requires an integer sps")
    up = rate.numerator
    if taps is None:
        taps = rrc_taps(beta, up, span_symbols)
    y = upfirdn(taps * math.sqrt(up), np.asarray(symbols, dtype=np.complex128), up=up)
    delay = (len(taps) - 1) // 2
    out_len = len(symbols) * up
    y = y[delay : delay + out_len]
    if len(y) < out_len:
        y = np.concatenate((y, np.zeros(out_len - len(y), dtype=np.complex128)))
    return y


def shape_dual_pol(frame_x: np.ndarray, frame_y: np.ndarray, sps, beta: float,
                   span_symbols: int = 32) -> DualPolBlock:
    rate = as_fraction(sps)
    taps = rrc_taps(beta, rate.numerator, span_symbols)
    return DualPolBlock(
        shape_symbols(frame_x, rate, beta, span_symbols, taps),
        shape_symbols(frame_y, rate, beta, span_symbols, taps),
        rate,
    )


def shape_and_mux(frames: list[SymbolFrame], plan: DscmPlan, out_sps) -> DualPolBlock:
    """Shape each subcarrier, shift it to its center frequency, and sum.

    ``out_sps`` is the composite rate in samples per subcarrier symbol;
    the composite band (n_subcarriers x spacing plus roll-off) must fit
    inside it.
    """
    rate = as_fraction(out_sps)
    if len(frames) != plan.n_subcarriers:
        raise ValueError(
            f"expected {plan.n_subcarriers} subcarrier frames, got {len(frames)}"
        )
    n_sym = len(frames[0].x_pol)
    if any(len(f.x_pol) != n_sym for f in frames):
        raise ValueError("all subcarrier frames must have equal length")
    fs = float(rate) * plan.baud_per_sc
    edge = (plan.n_subcarriers - 1) / 2.0 * plan.sc_spacing + (
        1.0 + plan.roll_off
    ) * plan.baud_per_sc / 2.0
    if fs / 2.0 < edge:
        raise ValueError(
            f"composite band edge {edge:.3e} Hz exceeds Nyquist {fs / 2:.3e} Hz"
        )
    if rate.denominator != 1:
        raise ValueError("composite rate must be an integer multiple of the SC baud")

    out_x = np.zeros(n_sym * rate.numerator, dtype=np.complex128)
    out_y = np.zeros_like(out_x)
    t = np.arange(len(out_x)) / fs
    for frame, f_c, power in zip(frames, plan.center_freqs(), plan.power_vector):
        shift = np.exp(2j * np.pi * f_c * t)
        gain = math.sqrt(power)
        out_x += gain * shape_symbols(frame.x_pol, rate, plan.roll_off) * shift
        out_y += gain * shape_symbols(frame.y_pol, rate, plan.roll_off) * shift
    return DualPolBlock(out_x, out_y, rate)


# ---------------------------------------------------------------------------
# Raw frame dumps (cross-implementation interchange)
# ---------------------------------------------------------------------------

_HEADER_FIELDS = (
    "total_symbols",
    "ts_tone_len",
    "ts_sync_period",
    "ts_sync_repeats",
    "pilot_count",
)


def dump_frame(frame: SymbolFrame, path) -> None:
    """Write a frame as little-endian interleaved complex64 plus a header.

    ``<path>.cplx`` holds x then y polarization back to back; the sidecar
    ``<path>.hdr`` records the layout, seed, and rate as ``key=value``
    lines. Payload bits go to ``<path>.bits`` as packed uint8 (x then y).
    """
    path = Path(path)
    raw = np.concatenate((frame.x_pol, frame.y_pol)).astype("<c8")
    raw.tofile(path.with_suffix(".cplx"))
    np.packbits(
        np.concatenate((frame.bits_x, frame.bits_y)).astype(np.uint8)
    ).tofile(path.with_suffix(".bits"))
    lines = ["format=fracpon-frame-v1", "rate_sps=1/1", f"seed={frame.seed}"]
    for name in _HEADER_FIELDS:
        lines.append(f"{name}={getattr(frame.layout, name)}")
    path.with_suffix(".hdr").write_text("\n".join(lines) + "\n", encoding="ascii")


def load_frame(path) -> SymbolFrame:
    """Read back a frame written by :func:`dump_frame`."""
    path = Path(path)
    header = {}
    for line in path.with_suffix(".hdr").read_text(encoding="ascii").splitlines():
        if "=" in line:
            key, val = line.split("=", 1)
            header[key.strip()] = val.strip()
    if header.get("format") != "fracpon-frame-v1":
        raise ValueError(f"unrecognized frame dump format in {path}.hdr")
    layout = FrameLayout(**{name: int(header[name]) for name in _HEADER_FIELDS})
    raw = np.fromfile(path.with_suffix(".cplx"), dtype="<c8").astype(np.complex128)
    n = layout.total_symbols
    if len(raw) != 2 * n:
        raise ValueError(f"frame dump holds {len(raw)} samples, expected {2 * n}")
    nbits = layout.payload_bits_per_pol
    bits = np.unpackbits(np.fromfile(path.with_suffix(".bits"), dtype=np.uint8))
    bits = bits[: 2 * nbits].astype(np.int64)
    return SymbolFrame(
        raw[:n], raw[n:], layout, bits[:nbits], bits[nbits:], int(header["seed"])
    )
