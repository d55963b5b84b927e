"""Modulation and demodulation operators for OFDM, OTFS, and AFDM.

All three schemes are expressed as precoded OFDM: the transmitted block is
x = F^H Q c, where F is the size-N unitary DFT and the precoder Q is the
identity for OFDM, a Kronecker-structured delay-Doppler mapping for OTFS,
and a double-chirp product for AFDM. Receivers undo the precoding with
Q^{-1} after frequency-domain equalization.

Dense precoder matrices are available through :func:`build_precoder` for
analysis at moderate block sizes. :func:`modulate`, :func:`demodulate`,
:func:`apply_precoder`, and :func:`apply_inverse_precoder` use FFT-based
operator forms (diagonal multiplies, orthonormal FFTs, and grid reshapes)
so that simulation loops never pay for O(N^2) matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DimensionError

OFDM = "ofdm"
OTFS = "otfs"
AFDM = "afdm"
KINDS = (OFDM, OTFS, AFDM)

DOMAINS = ("data", "time", "frequency")

# Dense N x N precoders beyond this size are refused; use the operator forms.
DENSE_SIZE_LIMIT = 4096


@dataclass(frozen=True)
class WaveformConfig:
    """Parameters of one multicarrier waveform.

    Attributes:
        kind: one of "ofdm", "otfs", "afdm".
        N: number of subcarriers (block length).
        K, L: OTFS delay-Doppler grid dimensions; K * L must equal N.
        q, alpha: AFDM chirp rates, arbitrary reals.
    """

    kind: str
    N: int
    K: int = 0
    L: int = 0
    q: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown waveform kind {self.kind!r}")
        if self.N < 1:
            raise ConfigError(f"subcarrier count must be >= 1, got {self.N}")
        if self.kind == OTFS:
            if self.K < 1 or self.L < 1:
                raise ConfigError("OTFS requires positive grid dimensions K and L")
            if self.K * self.L != self.N:
                raise ConfigError(
                    f"OTFS grid {self.K}x{self.L} does not match N={self.N}"
                )

    @classmethod
    def ofdm(cls, n: int) -> "WaveformConfig":
        return cls(OFDM, n)

    @classmethod
    def otfs(cls, k: int, l: int) -> "WaveformConfig":
        return cls(OTFS, k * l, K=k, L=l)

    @classmethod
    def afdm(cls, n: int, q: float, alpha: float = 0.0) -> "WaveformConfig":
        return cls(AFDM, n, q=float(q), alpha=float(alpha))

    @property
    def label(self) -> str:
        if self.kind == OTFS:
            return f"OTFS (L={self.L})"
        if self.kind == AFDM:
            return f"AFDM (q={self.q:g})"
        return "OFDM"

    @property
    def slug(self) -> str:
        """Filesystem-safe identifier used in output file names."""
        if self.kind == OTFS:
            return f"otfs_k{self.K}_l{self.L}"
        if self.kind == AFDM:
            text = f"afdm_q{self.q:g}_a{self.alpha:g}"
            return text.replace("-", "m").replace(".", "p")
        return "ofdm"


@dataclass(frozen=True, eq=False)
class SignalVector:
    """Length-N complex vector tagged with the domain it lives in."""

    values: np.ndarray
    domain: str

    def __post_init__(self):
        if self.domain not in DOMAINS:
            raise ConfigError(f"unknown signal domain {self.domain!r}")
        values = np.array(self.values, dtype=complex)
        if values.ndim != 1:
            raise DimensionError(f"signal must be 1-D, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None):
        return np.asarray(self.values, dtype=dtype)


def _as_vector(x, n: int, expected_domain: str | None = None) -> np.ndarray:
    if isinstance(x, SignalVector):
        if expected_domain is not None and x.domain != expected_domain:
            raise ConfigError(
                f"expected a {expected_domain!r}-domain signal, got {x.domain!r}"
            )
        x = x.values
    v = np.asarray(x, dtype=complex)
    if v.shape != (n,):
        raise DimensionError(f"expected a length-{n} vector, got shape {v.shape}")
    return v


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix with entry (j, k) = exp(-2j*pi*j*k/n) / sqrt(n)."""
    if n < 1:
        raise DimensionError(f"transform size must be a positive integer, got {n}")
    idx = np.arange(n)
    return np.exp((-2j * np.pi / n) * np.outer(idx, idx)) / np.sqrt(n)


def chirp_diagonal(n: int, rate: float) -> np.ndarray:
    """Diagonal of the chirp matrix: entries exp(1j*pi*rate*k^2/n)."""
    k = np.arange(n)
    return np.exp((1j * np.pi * rate / n) * k * k)


def otfs_inverse_entry(u: int, v: int, k: int, l: int) -> complex:
    """Closed-form entry (u, v) of the OTFS demodulation matrix Q^{-1}.

    Rows are supported on the K columns v with (v - floor(u/K)) mod L == 0,
    where each nonzero entry has magnitude sqrt(L/N).
    """
    n = k * l
    if not (0 <= u < n and 0 <= v < n):
        raise IndexError(f"indices ({u}, {v}) out of range for N={n}")
    mu, r = divmod(u, k)
    if (v - mu) % l != 0:
        return 0j
    return l / np.sqrt(l * n) * np.exp(2j * np.pi * v * r / n)


def otfs_inverse_matrix(k: int, l: int) -> np.ndarray:
    """Vectorized closed form of the OTFS Q^{-1} (same entries as above)."""
    n = k * l
    u = np.arange(n)[:, None]
    v = np.arange(n)[None, :]
    mu = u // k
    r = u % k
    entries = l / np.sqrt(l * n) * np.exp((2j * np.pi / n) * v * r)
    return np.where((v - mu) % l == 0, entries, 0j)


def afdm_inverse_column(n: int, q: float) -> np.ndarray:
    """Generalized quadratic Gauss sum defining the AFDM demodulator.

    Entry u is (1/sqrt(n)) * sum_k exp(-1j*pi*q*k^2/n) * exp(-2j*pi*k*u/n),
    i.e. the sqrt(n)-scaled first column of the circulant chirp factor of
    Q^{-1}. For integer q with n/q integer the column is sparse with n/|q|
    evenly spaced nonzeros; for generic real q it is dense.
    """
    if n < 1:
        raise DimensionError(f"column length must be >= 1, got {n}")
    k = np.arange(n)
    phases = np.exp((-1j * np.pi * q / n) * k * k)
    return np.fft.fft(phases) / np.sqrt(n)


@dataclass(frozen=True, eq=False)
class PrecoderMatrix:
    """Dense unitary precoder Q and its inverse for one waveform config.

    Q and Q_inv are built from independent factorizations (forward product
    vs. inverse product or closed form), so Q_inv ~= Q^H is a checkable
    property rather than a construction artifact.
    """

    Q: np.ndarray
    Q_inv: np.ndarray
    config: WaveformConfig


def build_precoder(cfg: WaveformConfig) -> PrecoderMatrix:
    """Materialize the dense N x N precoder pair for ``cfg``."""
    n = cfg.N
    if n > DENSE_SIZE_LIMIT:
        raise ConfigError(
            f"dense precoder limited to N <= {DENSE_SIZE_LIMIT}, got {n}; "
            "use the operator-form modulate/demodulate instead"
        )
    if cfg.kind == OFDM:
        q = np.eye(n, dtype=complex)
        q_inv = np.eye(n, dtype=complex)
    elif cfg.kind == OTFS:
        f_n = dft_matrix(n)
        f_l = dft_matrix(cfg.L)
        q = f_n @ np.kron(f_l.conj().T, np.eye(cfg.K))
        q_inv = otfs_inverse_matrix(cfg.K, cfg.L)
    else:
        f_n = dft_matrix(n)
        lam_q = chirp_diagonal(n, cfg.q)
        lam_a = chirp_diagonal(n, cfg.alpha)
        q = (f_n * lam_q[None, :]) @ (f_n.conj().T * lam_a[None, :])
        q_inv = (lam_a.conj()[:, None] * f_n) @ (lam_q.conj()[:, None] * f_n.conj().T)
    return PrecoderMatrix(q, q_inv, cfg)


def _synthesize(cfg: WaveformConfig, c: np.ndarray) -> np.ndarray:
    # F^H Q c without dense products.
    if cfg.kind == OFDM:
        return np.fft.ifft(c, norm="ortho")
    if cfg.kind == OTFS:
        # column-major vec of the K x L delay-Doppler grid
        grid = c.reshape((cfg.K, cfg.L), order="F")
        return np.fft.ifft(grid, axis=1, norm="ortho").reshape(cfg.N, order="F")
    chirped = chirp_diagonal(cfg.N, cfg.alpha) * c
    return chirp_diagonal(cfg.N, cfg.q) * np.fft.ifft(chirped, norm="ortho")


def apply_precoder(cfg: WaveformConfig, c) -> np.ndarray:
    """Compute z = Q c with FFT-based operators."""
    v = _as_vector(c, cfg.N)
    if cfg.kind == OFDM:
        return v.copy()
    return np.fft.fft(_synthesize(cfg, v), norm="ortho")


def apply_inverse_precoder(cfg: WaveformConfig, r) -> np.ndarray:
    """Compute Q^{-1} r with FFT-based operators."""
    v = _as_vector(r, cfg.N)
    if cfg.kind == OFDM:
        return v.copy()
    if cfg.kind == OTFS:
        grid = np.fft.ifft(v, norm="ortho").reshape((cfg.K, cfg.L), order="F")
        return np.fft.fft(grid, axis=1, norm="ortho").reshape(cfg.N, order="F")
    dechirped = chirp_diagonal(cfg.N, cfg.q).conj() * np.fft.ifft(v, norm="ortho")
    return chirp_diagonal(cfg.N, cfg.alpha).conj() * np.fft.fft(dechirped, norm="ortho")


def modulate(cfg: WaveformConfig, c) -> SignalVector:
    """Map a data vector to the transmitted time-domain block x = F^H Q c."""
    v = _as_vector(c, cfg.N, expected_domain="data")
    return SignalVector(_synthesize(cfg, v), "time")


def demodulate(cfg: WaveformConfig, r_f) -> SignalVector:
    """Undo the precoding of an equalized frequency-domain vector."""
    v = _as_vector(r_f, cfg.N, expected_domain="frequency")
    return SignalVector(apply_inverse_precoder(cfg, v), "data")
