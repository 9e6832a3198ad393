"""Single-photon pulse shapes: grids, normalization, transforms, shaping.

A pulse is a complex amplitude per (time, channel) on a uniform power-of-two
grid; its squared modulus integrates to one for a single photon.  Analytic
shapes (gaussian, one-sided exponentials, square) are described by a
:class:`PulseSpec` and materialized onto a grid on demand.  Jump
discontinuities that land exactly on a grid point are sampled at the mean of
the one-sided limits, which keeps discrete norms and both shaping paths at
second-order accuracy.

Fourier convention: forward transform ``int exp(-i w t) f(t) dt``, realised
by the FFT with explicit ``dt`` and ``t_start`` phase factors so spectra of
time-shifted pulses differ only by a linear phase.

Two independent shaping paths are provided:

* :func:`shape_fft` multiplies the pulse spectrum by the filter response per
  frequency bin (the delta feedthrough is applied exactly in the time
  domain, never discretized);
* :func:`shape_ode` integrates, per stage, the one-pole state
  ``eta' = a eta + xi`` with classical fixed-step fourth-order stepping
  (input interpolated linearly between samples) and forms
  ``xi_out = S xi + h theta theta^dag S eta``.

They approximate the same continuum result and serve as cross-oracles.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .transfer import PhotonTransfer

__all__ = [
    "TimeGrid",
    "Pulse",
    "PulseSpec",
    "PulseSpectrum",
    "GridSpanError",
    "gaussian_pulse",
    "decaying_exp_pulse",
    "rising_exp_pulse",
    "square_pulse",
    "normalize",
    "fourier",
    "inverse_fourier",
    "shape_fft",
    "shape_ode",
    "read_pulse_csv",
    "write_pulse_csv",
    "write_spectrum_csv",
    "parse_pulse_spec",
]

#: Kernel tail energy allowed beyond half the grid span before shaping
#: refuses the grid (controls circular-convolution aliasing).
TAIL_ENERGY_TOL = 1e-8

#: Fixed-step stability/accuracy guard for the time-domain path.
ODE_STEP_LIMIT = 0.1


class GridSpanError(ValueError):
    """Time grid too short for the filter kernel to settle."""

    def __init__(self, message: str, suggested_span: float):
        super().__init__(message)
        self.suggested_span = suggested_span


@dataclass(frozen=True)
class TimeGrid:
    """Uniform time grid with a power-of-two sample count."""

    t_start: float
    dt: float
    n: int

    def __post_init__(self) -> None:
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if self.n < 2 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"sample count must be a power of two, got {self.n}")

    @property
    def span(self) -> float:
        return self.n * self.dt

    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n)

    def omegas(self) -> np.ndarray:
        """FFT bin frequencies (rad/time), in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dt)


@dataclass(frozen=True, eq=False)
class Pulse:
    """Sampled multi-channel pulse, shape ``(n, K)``."""

    grid: TimeGrid
    samples: np.ndarray
    kind: str = "sampled"

    def __post_init__(self) -> None:
        s = np.array(self.samples, dtype=complex)
        if s.ndim == 1:
            s = s[:, None]
        if s.ndim != 2 or s.shape[0] != self.grid.n:
            raise ValueError(
                f"samples must have shape (n, K) with n={self.grid.n}, got {s.shape}"
            )
        if not np.all(np.isfinite(s)):
            raise ValueError("pulse samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def channels(self) -> int:
        return self.samples.shape[1]

    def norm(self) -> float:
        """Discrete L2 norm, ``sqrt(sum_k sum_t |xi_k|^2 dt)``."""
        return float(np.sqrt(np.sum(np.abs(self.samples) ** 2) * self.grid.dt))

    def energy_fraction_before(self, t_cut: float = 0.0) -> float:
        """Fraction of total energy at times strictly before ``t_cut``."""
        total = float(np.sum(np.abs(self.samples) ** 2))
        if total == 0.0:
            return 0.0
        mask = self.grid.times() < t_cut
        return float(np.sum(np.abs(self.samples[mask]) ** 2) / total)


def _step_up(t: np.ndarray, edge: float, dt: float) -> np.ndarray:
    """Unit step with midpoint value where the edge lands on a grid point."""
    s = np.where(t > edge, 1.0, 0.0)
    s[np.abs(t - edge) <= 1e-9 * dt] = 0.5
    return s


def _mono(grid: TimeGrid, column: np.ndarray, channels: int, channel: int, kind: str) -> Pulse:
    if not 0 <= channel < channels:
        raise ValueError(f"channel {channel} out of range for {channels} channels")
    samples = np.zeros((grid.n, channels), dtype=complex)
    samples[:, channel] = column
    return Pulse(grid=grid, samples=samples, kind=kind)


def gaussian_pulse(
    grid: TimeGrid, t0: float, sigma: float, channels: int = 1, channel: int = 0
) -> Pulse:
    """Unit-norm gaussian: ``(2 pi sigma^2)^(-1/4) exp(-(t-t0)^2 / (4 sigma^2))``."""
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    t = grid.times()
    col = (2.0 * np.pi * sigma**2) ** (-0.25) * np.exp(-((t - t0) ** 2) / (4.0 * sigma**2))
    return _mono(grid, col.astype(complex), channels, channel, "gaussian")


def decaying_exp_pulse(
    grid: TimeGrid, kappa: float, t_on: float = 0.0, channels: int = 1, channel: int = 0
) -> Pulse:
    """One-sided decay ``sqrt(kappa) exp(-kappa (t - t_on)/2)`` for ``t >= t_on``."""
    if not kappa > 0.0:
        raise ValueError("kappa must be positive")
    t = grid.times()
    col = np.sqrt(kappa) * np.exp(-0.5 * kappa * (t - t_on)) * _step_up(t, t_on, grid.dt)
    return _mono(grid, col.astype(complex), channels, channel, "decaying_exp")


def rising_exp_pulse(
    grid: TimeGrid, kappa: float, omega_c: float, channels: int = 1, channel: int = 0
) -> Pulse:
    """Rising exponential with resonant phase, supported at ``t < 0``.

    ``xi(t) = -sqrt(kappa) exp((kappa/2 - i omega_c) t)`` up to ``t = 0``;
    this is the pulse whose spectrum cancels the zero of the matched
    two-level filter and fully excites the system.  Unit norm in the
    continuum.
    """
    if not kappa > 0.0:
        raise ValueError("kappa must be positive")
    t = grid.times()
    col = -np.sqrt(kappa) * np.exp((0.5 * kappa - 1j * omega_c) * t) * (
        1.0 - _step_up(t, 0.0, grid.dt)
    )
    return _mono(grid, col, channels, channel, "rising_exp")


def square_pulse(
    grid: TimeGrid, t0: float, t1: float, channels: int = 1, channel: int = 0
) -> Pulse:
    """Flat pulse of unit norm on ``[t0, t1]``."""
    if not t1 > t0:
        raise ValueError("square pulse needs t1 > t0")
    t = grid.times()
    col = (_step_up(t, t0, grid.dt) - _step_up(t, t1, grid.dt)) / np.sqrt(t1 - t0)
    return _mono(grid, col.astype(complex), channels, channel, "square")


_PULSE_BUILDERS = {
    "gaussian": (gaussian_pulse, ("t0", "sigma")),
    "decaying_exp": (decaying_exp_pulse, ("kappa", "t_on")),
    "rising_exp": (rising_exp_pulse, ("kappa", "omega_c")),
    "square": (square_pulse, ("t0", "t1")),
}


@dataclass(frozen=True)
class PulseSpec:
    """Analytic pulse descriptor; materializes to samples on demand."""

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _PULSE_BUILDERS:
            raise ValueError(
                f"unknown pulse kind '{self.kind}'; choose from {sorted(_PULSE_BUILDERS)}"
            )
        builder, names = _PULSE_BUILDERS[self.kind]
        unknown = set(self.params) - set(names)
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")

    def materialize(self, grid: TimeGrid, channels: int = 1, channel: int = 0) -> Pulse:
        builder, names = _PULSE_BUILDERS[self.kind]
        missing = [n for n in names if n not in self.params]
        if missing:
            raise ValueError(f"pulse kind {self.kind} needs parameters {missing}")
        args = [float(self.params[n]) for n in names]
        return builder(grid, *args, channels=channels, channel=channel)


def parse_pulse_spec(text: str) -> PulseSpec:
    """Parse ``kind`` or ``kind:name=value,name=value`` into a :class:`PulseSpec`."""
    kind, _, tail = text.partition(":")
    params = {}
    if tail:
        for item in tail.split(","):
            name, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"malformed pulse parameter '{item}' (expected name=value)")
            params[name.strip()] = float(value)
    return PulseSpec(kind=kind.strip(), params=params)


def normalize(p: Pulse) -> Pulse:
    """Rescale so the discrete norm is exactly one."""
    n = p.norm()
    if n == 0.0:
        raise ValueError("cannot normalize a zero pulse")
    return Pulse(grid=p.grid, samples=p.samples / n, kind=p.kind)


@dataclass(frozen=True, eq=False)
class PulseSpectrum:
    """Continuous-convention spectrum samples on an increasing frequency grid."""

    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        w = np.array(self.omegas, dtype=float).reshape(-1)
        v = np.array(self.values, dtype=complex)
        if v.ndim == 1:
            v = v[:, None]
        if v.shape[0] != w.size:
            raise ValueError("omegas and values length mismatch")
        w.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "values", v)

    @property
    def channels(self) -> int:
        return self.values.shape[1]


def fourier(p: Pulse) -> PulseSpectrum:
    """Forward transform with the ``exp(-i w t)`` convention.

    ``dt`` scaling and the ``exp(-i w t_start)`` phase make the result a
    quadrature of the continuous transform, so Parseval holds with
    ``sum |spectrum|^2 dw / 2 pi = sum |pulse|^2 dt``.
    """
    w = p.grid.omegas()
    vals = np.fft.fft(p.samples, axis=0) * p.grid.dt
    vals *= np.exp(-1j * w * p.grid.t_start)[:, None]
    order = np.fft.fftshift(np.arange(p.grid.n))
    return PulseSpectrum(omegas=w[order], values=vals[order])


def inverse_fourier(spec: PulseSpectrum, grid: TimeGrid) -> Pulse:
    """Inverse of :func:`fourier` back onto ``grid``."""
    if spec.omegas.size != grid.n:
        raise ValueError("spectrum length does not match the grid")
    order = np.fft.ifftshift(np.arange(grid.n))
    vals = spec.values[order]
    w = grid.omegas()
    vals = vals * np.exp(1j * w * grid.t_start)[:, None]
    samples = np.fft.ifft(vals, axis=0) / grid.dt
    return Pulse(grid=grid, samples=samples)


def _check_span(p: Pulse, f: PhotonTransfer) -> None:
    span = p.grid.span
    worst = 0.0
    for st in f.stages:
        if np.all(st.kernel_matrix == 0.0):
            continue
        # Kernel energy left beyond half the span (the other half holds the input).
        tail = np.exp(2.0 * st.a.real * (span / 2.0))
        needed = 2.0 * np.log(TAIL_ENERGY_TOL) / (2.0 * st.a.real)
        if tail > TAIL_ENERGY_TOL:
            worst = max(worst, needed)
    if worst > 0.0:
        raise GridSpanError(
            f"grid span {span:.6g} too short for the filter kernel to settle; "
            f"use a span of at least {worst:.6g}",
            suggested_span=worst,
        )


def _match_channels(p: Pulse, f: PhotonTransfer) -> None:
    if p.channels != f.channels:
        raise ValueError(
            f"pulse has {p.channels} channels but the filter has {f.channels}"
        )


def shape_fft(p: Pulse, f: PhotonTransfer) -> Pulse:
    """Shape a pulse through the filter in the frequency domain.

    Per FFT bin, the output spectrum is ``G(i w)`` times the input spectrum.
    The constant feedthrough is split off and applied exactly to the time
    samples; only the strictly proper part passes through the FFT pair.
    Raises :class:`GridSpanError` when the kernel cannot settle on the grid.
    """
    _match_channels(p, f)
    _check_span(p, f)
    w = p.grid.omegas()
    g = f.response_matrix(w)
    d = f.feedthrough
    spec = np.fft.fft(p.samples, axis=0)
    smooth = np.einsum("nij,nj->ni", g - d[None, :, :], spec)
    out = p.samples @ d.T + np.fft.ifft(smooth, axis=0)
    return Pulse(grid=p.grid, samples=out)


def shape_ode(p: Pulse, f: PhotonTransfer) -> Pulse:
    """Shape a pulse through the filter by time-domain integration.

    Independent oracle for :func:`shape_fft`: every stage integrates
    ``eta' = a eta + xi`` from rest with classical fourth-order fixed-step
    stepping (linear interpolation of the input between samples) and emits
    ``S xi + h theta theta^dag S eta``.
    """
    _match_channels(p, f)
    x = p.samples
    dt = p.grid.dt
    for st in f.stages:
        if abs(st.a) * dt > ODE_STEP_LIMIT:
            raise ValueError(
                f"time step too coarse for the stage pole: |a| dt = {abs(st.a) * dt:.3g} "
                f"> {ODE_STEP_LIMIT}; use a finer grid"
            )
        n = x.shape[0]
        eta = np.zeros_like(x)
        a = st.a
        cur = eta[0]
        for m in range(n - 1):
            xm = x[m]
            xm1 = x[m + 1]
            xmid = 0.5 * (xm + xm1)
            k1 = dt * (a * cur + xm)
            k2 = dt * (a * (cur + 0.5 * k1) + xmid)
            k3 = dt * (a * (cur + 0.5 * k2) + xmid)
            k4 = dt * (a * (cur + k3) + xm1)
            cur = cur + (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
            eta[m + 1] = cur
        x = x @ st.S.T + eta @ st.kernel_matrix.T
    return Pulse(grid=p.grid, samples=x)


# ---------------------------------------------------------------------------
# CSV formats: pulses as ``t,ch,re,im`` rows, spectra as ``omega,ch,re,im``.
# Values use fixed 17-significant-digit scientific notation for
# reproducible diffs.
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def write_pulse_csv(p: Pulse, path) -> None:
    t = p.grid.times()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("t,ch,re,im\n")
        for i in range(p.grid.n):
            for ch in range(p.channels):
                z = p.samples[i, ch]
                fh.write(f"{_fmt(t[i])},{ch},{_fmt(z.real)},{_fmt(z.imag)}\n")


def read_pulse_csv(path) -> Pulse:
    ts = []
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "ch", "re", "im"]:
            raise ValueError("pulse CSV must start with header 't,ch,re,im'")
        for line in reader:
            if not line:
                continue
            t, ch, re, im = line
            ts.append(float(t))
            rows.append((float(t), int(ch), complex(float(re), float(im))))
    if not rows:
        raise ValueError("pulse CSV contains no samples")
    times = np.array(sorted(set(ts)))
    channels = max(r[1] for r in rows) + 1
    n = times.size
    if n < 2:
        raise ValueError("pulse CSV needs at least two time samples")
    dt = times[1] - times[0]
    if np.any(np.abs(np.diff(times) - dt) > 1e-9 * dt):
        raise ValueError("pulse CSV time grid is not uniform")
    grid = TimeGrid(t_start=float(times[0]), dt=float(dt), n=n)
    index = {t: i for i, t in enumerate(times)}
    samples = np.zeros((n, channels), dtype=complex)
    for t, ch, z in rows:
        samples[index[t], ch] = z
    return Pulse(grid=grid, samples=samples)


def write_spectrum_csv(spec: PulseSpectrum, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("omega,ch,re,im\n")
        for i in range(spec.omegas.size):
            for ch in range(spec.channels):
                z = spec.values[i, ch]
                fh.write(f"{_fmt(spec.omegas[i])},{ch},{_fmt(z.real)},{_fmt(z.imag)}\n")
