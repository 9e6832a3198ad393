"""Closed-form reference responses for the worked two-level configurations.

Everything here is an explicit formula, independent of the model/filter
machinery, so the rest of the package can be tested against it:

* single-channel two-level transfer
  ``g(i w) = (-k/2 + i(w + w_c)) / (k/2 + i(w + w_c))`` (all-pass);
* two-channel transmission/reflection pair with
  ``|g1|^2 + |g2|^2 = 1``;
* N-element memory chain ``g^N`` and its time-domain kernel in terms of the
  Kummer confluent hypergeometric function;
* the rising-exponential input that inverts the two-level zero;
* the closed single-channel response after feeding channel 2 back onto
  itself through a scattering matrix (real or complex).

Kernel sign/phase note: the naive kernel guess
``k N exp(-k t / 2) 1F1(1+N, 2, -k t)`` does not reduce to the N = 1
single-atom kernel ``-k exp(-(k/2 + i w_c) t)``.  Matching the inverse
transform of ``g^N`` (checked numerically in the test suite) fixes the
kernel to

    -k N exp(+k t / 2) 1F1(1+N, 2, -k t) exp(-i w_c t),

which this module evaluates through the reflected, terminating series
``-k N exp(-k t / 2) 1F1(1-N, 2, k t) exp(-i w_c t)`` (the two forms are
identical by the Kummer reflection 1F1(a,b,z) = e^z 1F1(b-a,b,-z)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SingularLoopError, SINGULAR_LOOP_TOL
from .pulses import PulseSpec

__all__ = [
    "TwoLevelParams",
    "two_level_g",
    "two_channel_g",
    "memory_g",
    "memory_kernel",
    "kummer_1f1",
    "inverting_pulse",
    "feedback_g",
]


@dataclass(frozen=True)
class TwoLevelParams:
    """Two-level system constants: decay rate ``kappa`` and transition frequency."""

    kappa: float
    omega_c: float = 0.0

    def __post_init__(self) -> None:
        if not self.kappa > 0.0:
            raise ValueError("kappa must be positive")


def two_level_g(p: TwoLevelParams, omega):
    """Single-channel two-level transfer; unit modulus at every frequency."""
    w = np.asarray(omega, dtype=float)
    num = -0.5 * p.kappa + 1j * (w + p.omega_c)
    den = 0.5 * p.kappa + 1j * (w + p.omega_c)
    return num / den


def two_channel_g(kappa1: float, kappa2: float, omega_c: float, omega):
    """Transmission/reflection pair ``(g1, g2)`` for a two-channel two-level system.

    ``g1`` maps channel-1 input to channel-1 output; the channel-2 output is
    ``-g2`` times the input spectrum (the reflection carries a minus in the
    filter matrix element).  ``|g1|^2 + |g2|^2 = 1``; the reflection reaches
    unity only at ``w = -w_c`` with equal couplings.
    """
    if not (kappa1 > 0.0 and kappa2 > 0.0):
        raise ValueError("kappa1 and kappa2 must be positive")
    w = np.asarray(omega, dtype=float)
    den = 0.5 * (kappa1 + kappa2) + 1j * (w + omega_c)
    g1 = (-0.5 * (kappa1 - kappa2) + 1j * (w + omega_c)) / den
    g2 = np.sqrt(kappa1 * kappa2) / den
    return g1, g2


def memory_g(n: int, p: TwoLevelParams, omega):
    """Frequency response of ``n`` identical two-level elements in series."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return two_level_g(p, omega) ** n


def kummer_1f1(a: complex, b: complex, z: complex, min_terms: int = 0) -> complex:
    """Confluent hypergeometric ``1F1(a; b; z)`` by direct series.

    Terms are accumulated with compensated summation and the series stops
    adaptively once three consecutive terms fall below ``1e-16`` of the
    partial sum (``min_terms`` forces extra terms first, useful for
    truncation-stability checks).  Arguments with ``Re(z) < 0`` are routed
    through the reflection ``1F1(a,b,z) = e^z 1F1(b-a, b, -z)`` so the
    summed series never suffers catastrophic cancellation; for the memory
    kernel's parameters the reflected series terminates exactly.
    """
    a = complex(a)
    b = complex(b)
    z = complex(z)
    if b.imag == 0.0 and b.real <= 0.0 and b.real == int(b.real):
        raise ValueError("1F1 is undefined for nonpositive integer b")
    if z.real < 0.0:
        return np.exp(z) * _kummer_series(b - a, b, -z, min_terms)
    return _kummer_series(a, b, z, min_terms)


def _kummer_series(a: complex, b: complex, z: complex, min_terms: int) -> complex:
    total = 1.0 + 0.0j
    comp = 0.0 + 0.0j
    term = 1.0 + 0.0j
    streak = 0
    k = 0
    while True:
        term = term * (a + k) * z / ((b + k) * (k + 1))
        k += 1
        y = term - comp
        t = total + y
        comp = (t - total) - y
        total = t
        if abs(term) <= 1e-16 * abs(total):
            streak += 1
            if streak >= 3 and k >= min_terms:
                return total
        else:
            streak = 0
        if k > 100000:
            raise RuntimeError("1F1 series failed to converge within 100000 terms")


def memory_kernel(n: int, p: TwoLevelParams, t):
    """Smooth part of the N-element memory kernel at times ``t >= 0``.

    Equals ``-kappa N exp(kappa t / 2) 1F1(1+N, 2, -kappa t) exp(-i w_c t)``
    (see the module docstring for the sign/phase reconciliation); the delta
    feedthrough is carried separately by callers.  Rejects negative times:
    the kernel is causal.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ts = np.asarray(t, dtype=float)
    if np.any(ts < 0.0):
        raise ValueError("kernel is causal; t must be nonnegative")
    flat = np.atleast_1d(ts).ravel()
    poly = np.array(
        [_kummer_series(complex(1 - n), 2.0 + 0.0j, complex(p.kappa * ti), 0) for ti in flat]
    )
    vals = (
        -p.kappa
        * n
        * np.exp(-0.5 * p.kappa * flat)
        * poly
        * np.exp(-1j * p.omega_c * flat)
    )
    if ts.ndim == 0:
        return complex(vals[0])
    return vals.reshape(ts.shape)


def inverting_pulse(p: TwoLevelParams) -> PulseSpec:
    """Input that cancels the two-level transfer zero and fully excites the system.

    ``xi(t) = -sqrt(kappa) exp((kappa/2 - i w_c) t)`` for ``t < 0`` (unit
    continuum norm); its spectrum is ``sqrt(kappa) / (-kappa/2 + i(w + w_c))``.
    """
    return PulseSpec(kind="rising_exp", params={"kappa": p.kappa, "omega_c": p.omega_c})


def feedback_g(S, kappa1: float, kappa2: float, omega_c: float, omega):
    """Closed-loop single-channel response after feeding channel 2 back.

    With ``w = S12 (1 - S22)^-1``, the loop leaves a single channel with
    feedthrough ``S11 + w S21``, coupling amplitude
    ``theta = sqrt(kappa1) + w sqrt(kappa2)``, and resonance shifted by
    ``Delta = Im(sqrt(kappa1 kappa2) w + kappa2 S22 (1 - S22)^-1)``:

        G(i w) = (S11 + w S21) *
                 (-|theta|^2/2 + i(w + w_c + Delta)) /
                 (+|theta|^2/2 + i(w + w_c + Delta)).

    Real scattering gives ``Delta = 0``; the complex case only adds the
    shift.  The coupling enters through its modulus squared, which keeps the
    loop response all-pass (for a unitary ``S``) and matches the filter
    pipeline on the reduced model.
    """
    if not (kappa1 > 0.0 and kappa2 > 0.0):
        raise ValueError("kappa1 and kappa2 must be positive")
    s = np.asarray(S, dtype=complex)
    if s.shape != (2, 2):
        raise ValueError("S must be 2x2")
    denom = 1.0 - s[1, 1]
    if abs(denom) <= SINGULAR_LOOP_TOL:
        raise SingularLoopError(
            f"singular loop: |1 - S22| = {abs(denom):.3e} (open feedback path)"
        )
    w_gain = s[0, 1] / denom
    s_red = s[0, 0] + w_gain * s[1, 0]
    theta = np.sqrt(kappa1) + w_gain * np.sqrt(kappa2)
    delta = (np.sqrt(kappa1 * kappa2) * w_gain + kappa2 * s[1, 1] / denom).imag
    width = abs(theta) ** 2
    w = np.asarray(omega, dtype=float)
    detune = 1j * (w + omega_c + delta)
    return s_red * (-0.5 * width + detune) / (0.5 * width + detune)
