"""Detection model: free-induction decay, spectra, multiplet integrals, cosine fit.

The FID is Tr(rho(t) * M+) * exp(-t/T2) with M+ = sum_k (sx_k + i sy_k)/2
and rho(t) the state evolved under the diagonal static Hamiltonian, so the
signal is an exact sum of decaying complex exponentials.  The spectrum is
the forward DFT (kernel exp(-i*2*pi*f*t), no normalization); the frequency
axis is oriented so a spin with shift nu_k lands at +nu_k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .molecule import SpinSystem, hamiltonian
from .paulis import PauliString, pauli_matrix
from .simulate import DeviationState

DEFAULT_T2 = 0.3          # seconds; ~1 Hz lines, leaves the J13 pairs partially overlapped
DEFAULT_DWELL = 10e-6     # seconds per point
DEFAULT_NPOINTS = 2 ** 17


class SpectroError(ValueError):
    pass


@dataclass(frozen=True)
class Fid:
    samples: np.ndarray
    dwell: float
    t2: float

    def __post_init__(self):
        if self.dwell <= 0:
            raise SpectroError("dwell must be positive")
        if len(self.samples) < 2:
            raise SpectroError("FID needs at least 2 samples")
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=complex))

    def to_csv(self) -> str:
        lines = ["t_s,real,imag"]
        for j, s in enumerate(self.samples):
            lines.append(f"{j * self.dwell!r},{s.real!r},{s.imag!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class Spectrum:
    frequencies: np.ndarray   # Hz, strictly increasing
    amplitudes: np.ndarray    # complex; absorption = real part

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        a = np.asarray(self.amplitudes, dtype=complex)
        if len(f) != len(a):
            raise SpectroError("axis and amplitude lengths differ")
        if np.any(np.diff(f) <= 0):
            raise SpectroError("frequency axis must be strictly increasing")
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "amplitudes", a)

    @property
    def step(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def to_csv(self) -> str:
        lines = ["freq_hz,real,imag"]
        for f, a in zip(self.frequencies, self.amplitudes):
            lines.append(f"{f!r},{a.real!r},{a.imag!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class FitResult:
    amplitude: float
    frequency_scale: float
    residual: float

    def to_json(self) -> str:
        import json
        return json.dumps(
            {"A": self.amplitude, "b": self.frequency_scale, "residual": self.residual},
            indent=2,
        )


def detection_operator(n: int) -> np.ndarray:
    """M+ = sum_k (sx_k + i*sy_k)/2 over all spins."""
    dim = 2 ** n
    m = np.zeros((dim, dim), dtype=complex)
    for k in range(1, n + 1):
        m += 0.5 * (
            pauli_matrix(PauliString.single(n, k, "X"), n)
            + 1j * pauli_matrix(PauliString.single(n, k, "Y"), n)
        )
    return m


def synthesize_fid(state: DeviationState, sys: SpinSystem, t2: float = DEFAULT_T2,
                   dwell: float = DEFAULT_DWELL, npoints: int = DEFAULT_NPOINTS) -> Fid:
    """Exact FID of a deviation state under the diagonal static Hamiltonian."""
    if t2 <= 0:
        raise SpectroError("t2 must be positive")
    energies = np.diag(hamiltonian(sys)).real
    mplus = detection_operator(sys.n)
    # Tr(rho(t) M+) = sum_ab rho_ab * M+_ba * exp(-i (E_a - E_b) t)
    weights = state.matrix * mplus.T
    a_idx, b_idx = np.nonzero(weights)
    w = weights[a_idx, b_idx]
    omega = energies[a_idx] - energies[b_idx]
    t = np.arange(npoints) * dwell
    samples = (np.exp(-1j * np.outer(t, omega)) @ w) * np.exp(-t / t2)
    return Fid(samples, dwell, t2)


def fid_to_spectrum(fid: Fid) -> Spectrum:
    """Forward DFT; axis oriented so shift nu_k appears at +nu_k."""
    n = len(fid.samples)
    amps = np.fft.fft(fid.samples)
    freqs = -np.fft.fftfreq(n, fid.dwell)
    order = np.argsort(freqs)
    return Spectrum(freqs[order], amps[order])


def integrate_multiplet(spec: Spectrum, center: float, halfwidth: float) -> float:
    """Sum of absorption amplitudes over the window, times the frequency step."""
    lo, hi = center - halfwidth, center + halfwidth
    if lo < spec.frequencies[0] or hi > spec.frequencies[-1]:
        raise SpectroError("integration window out of axis range")
    mask = (spec.frequencies >= lo) & (spec.frequencies <= hi)
    return float(np.sum(spec.amplitudes[mask].real) * spec.step)


def fit_cosine(xs, ys, max_iter: int = 200, tol: float = 1e-10) -> FitResult:
    """Least-squares fit of A*cos(b*x) by Gauss-Newton.

    Deterministic start A0 = max|y|, b0 = 1; stops when the parameter update
    falls below tol or after max_iter iterations.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if len(x) < 3 or len(x) != len(y):
        raise SpectroError("need at least 3 matched points")
    if np.ptp(x) == 0:
        raise SpectroError("x values must not all be equal")
    a = float(np.max(np.abs(y)))
    if a == 0:
        raise SpectroError("amplitude unidentifiable")
    b = 1.0
    for _ in range(max_iter):
        c = np.cos(b * x)
        s = np.sin(b * x)
        r = y - a * c
        jac = np.column_stack([-c, a * x * s])
        step, *_ = np.linalg.lstsq(jac, r, rcond=None)
        a -= step[0]
        b -= step[1]
        if np.max(np.abs(step)) < tol:
            break
    residual = float(np.linalg.norm(y - a * np.cos(b * x)))
    return FitResult(a, b, residual)
