"""Photocounting statistics of arrays of on-off detectors.

Quantum measurement operators are represented only through their Fock-basis
click probabilities.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DomainError, EnumerationSizeError, TruncationError

MODES = ("coherent-distributed", "incoherent-multiplexed")


def _check_counts(k: int, m: int, N: int, eta: float):
    if N < 1:
        raise DomainError(f"need at least one detector (N={N})")
    if m < 0 or k < 0:
        raise DomainError("photon and click numbers must be non-negative")
    if k > N:
        raise DomainError(f"k={k} exceeds the number of detectors N={N}")
    if not 0.0 <= eta <= 1.0:
        raise DomainError(f"efficiency {eta} outside [0, 1]")


def _binomials(n: int) -> list[int]:
    row = [1]
    for j in range(n):
        row.append(row[-1] * (n - j) // (j + 1))
    return row


def click_prob_given_fock(k: int, m: int, N: int, eta: float = 1.0) -> float:
    r"""P(k | m): probability of k clicks among N on-off detectors for m photons.

    .. math::
        P(k|m) = N^{-m} \binom{N}{k} \sum_{l=0}^{k} (-1)^l \binom{k}{l} [N - (N-k+l)\eta]^m

    The alternating sum is evaluated exactly over the rationals (``eta`` is
    converted exactly from its binary value) and rounded once at the end.  In
    double precision the terms cancel catastrophically for large N and m.
    """
    _check_counts(k, m, N, eta)
    e = Fraction(eta)
    p, q = e.numerator, e.denominator
    ck = _binomials(k)
    # N - (N-k+l) eta = (N q - (N-k+l) p) / q
    acc = 0
    for l in range(k + 1):
        term = ck[l] * (N * q - (N - k + l) * p) ** m
        acc += -term if l & 1 else term
    value = Fraction(math.comb(N, k) * acc, (N * q) ** m)
    return _clamp(float(value))


def _clamp(x: float) -> float:
    if -1e-12 <= x < 0.0:
        return 0.0
    if 1.0 < x <= 1.0 + 1e-12:
        return 1.0
    return x


def click_prob_series_fock(k: int, n: int, N: int) -> float:
    r"""P(k) for an n-photon Fock input at unit efficiency, from the Fock-basis series

    .. math::
        \frac{N!}{(N-k)!} N^{-n} \sum_{j=0}^{k} \frac{(-1)^j (k-j)^n}{j!(k-j)!}
    """
    _check_counts(k, n, N, 1.0)
    inner = sum(Fraction((-1) ** j * (k - j) ** n, math.factorial(j) * math.factorial(k - j)) for j in range(k + 1))
    return float(Fraction(math.perm(N, k), N**n) * inner)


def oracle_click_prob(k: int, m: int, N: int, eta: float = 1.0) -> float:
    """Brute-force P(k|m): every photon-to-detector assignment and every
    detected/undetected pattern.  Exponential; m, N <= 8."""
    _check_counts(k, m, N, eta)
    if m > 8 or N > 8:
        raise EnumerationSizeError(f"enumeration limited to m, N <= 8 (got m={m}, N={N})")
    total = 0.0
    weight_assign = 1.0 / N**m
    for assignment in itertools.product(range(N), repeat=m):
        for detected in itertools.product((False, True), repeat=m):
            fired = {d for d, hit in zip(assignment, detected) if hit}
            if len(fired) != k:
                continue
            n_det = sum(detected)
            total += weight_assign * eta**n_det * (1.0 - eta) ** (m - n_det)
    return total


def resolution_probability(m: int, N: int, eta: float = 1.0) -> float:
    """P(m | m): all m photons produce m distinct clicks."""
    if m > N:
        return 0.0
    return click_prob_given_fock(m, m, N, eta)


# -- sources ------------------------------------------------------------------------

@dataclass(frozen=True)
class PhotonSource:
    """Photon-number distribution P(n), n = 0 .. len(probabilities)-1."""

    kind: str
    probabilities: tuple[float, ...]
    params: dict = field(default_factory=dict, compare=False)

    @property
    def n_max(self) -> int:
        return len(self.probabilities) - 1

    @property
    def tail(self) -> float:
        return max(0.0, 1.0 - math.fsum(self.probabilities))


def fock(m: int) -> PhotonSource:
    if m < 0:
        raise DomainError("photon number must be >= 0")
    return PhotonSource("fock", tuple(0.0 for _ in range(m)) + (1.0,), {"m": m})


def vacuum() -> PhotonSource:
    return fock(0)


SQUEEZED_TAIL = 1e-12


def _squeezed_term(xi: float, n: int) -> float:
    if n % 2:
        return 0.0
    ratio = math.tanh(xi) / 2.0
    if n == 0 or ratio == 0.0:
        return 1.0 / math.cosh(xi) if n == 0 else 0.0
    log_p = -math.log(math.cosh(xi)) + n * math.log(ratio)
    return math.exp(log_p + math.lgamma(n + 1) - 2 * math.lgamma(n // 2 + 1))


def _squeezed_terms(xi: float, n_max: int) -> list[float]:
    return [_squeezed_term(xi, n) for n in range(n_max + 1)]


def squeezed_vacuum_pn(xi: float, n_max: int | None = None, tail_tol: float = 1e-9) -> PhotonSource:
    r"""Single-mode squeezed vacuum,
    :math:`P(n) = \frac{1}{\cosh\xi}\left(\frac{\tanh\xi}{2}\right)^n \frac{n!}{[(n/2)!]^2}` for even n.

    With ``n_max=None`` the truncation is the smallest even n leaving a tail
    below 1e-12.  An explicit ``n_max`` must leave a tail below ``tail_tol``.
    """
    if not xi >= 0 or not math.isfinite(xi):
        raise DomainError(f"squeezing parameter {xi} must be finite and >= 0")
    if n_max is None:
        probs = [_squeezed_term(xi, 0)]
        rough = probs[0]
        while True:
            # the running sum is only a cheap pre-check; the exact test uses fsum
            if 1.0 - rough < 10 * SQUEEZED_TAIL and 1.0 - math.fsum(probs) < SQUEEZED_TAIL:
                break
            n = len(probs)
            probs += [0.0, _squeezed_term(xi, n + 1)]
            rough += probs[-1]
    else:
        if n_max < 0 or n_max % 2:
            raise DomainError("n_max must be a non-negative even integer")
        probs = _squeezed_terms(xi, n_max)
        tail = 1.0 - math.fsum(probs)
        if tail >= tail_tol:
            raise TruncationError(f"n_max={n_max} leaves a tail of {tail:.3e} at xi={xi}", tail)
    return PhotonSource("squeezed_vacuum", tuple(probs), {"xi": xi})


# -- detector arrays ---------------------------------------------------------------------

@dataclass(frozen=True)
class DetectorArraySpec:
    """N on-off detectors.

    In ``coherent-distributed`` mode the array as a whole absorbs every photon,
    so statistics are evaluated at unit efficiency whatever ``eta`` is.
    """

    N: int
    eta: float = 1.0
    mode: str = "incoherent-multiplexed"

    def __post_init__(self):
        if self.N < 1:
            raise DomainError("N must be >= 1")
        if not 0.0 <= self.eta <= 1.0:
            raise DomainError(f"efficiency {self.eta} outside [0, 1]")
        if self.mode not in MODES:
            raise DomainError(f"unknown mode {self.mode!r}")

    @property
    def effective_eta(self) -> float:
        return 1.0 if self.mode == "coherent-distributed" else self.eta


@dataclass(frozen=True)
class ClickDistribution:
    probabilities: tuple[float, ...]
    array: DetectorArraySpec
    source: PhotonSource

    def __getitem__(self, k: int) -> float:
        return self.probabilities[k]


def source_click_distribution(source: PhotonSource, array: DetectorArraySpec) -> ClickDistribution:
    eta = array.effective_eta
    probs = []
    for k in range(array.N + 1):
        probs.append(
            math.fsum(
                pn * click_prob_given_fock(k, n, array.N, eta)
                for n, pn in enumerate(source.probabilities)
                if pn and k <= n
            )
        )
    return ClickDistribution(tuple(probs), array, source)


def resolution_curve(m: int, eta: float, n_values: Sequence[int]) -> list[tuple[int, float]]:
    return [(n, resolution_probability(m, n, eta)) for n in n_values]
