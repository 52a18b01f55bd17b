"""
MMSE filtering, max-SINR ordering and successive interference cancellation.

At every stage the sink filters the residual with the MMSE filter of the
undecoded columns, decodes the stream with the largest SINR, subtracts its
reconstructed contribution and drops its column. Because H[u] = H E[u] with
E[u] diagonal and unitary, the SINRs and the decode order do not depend on u
and the time-varying filter factors into a static MMSE filter followed by a
per-symbol Doppler compensation. The decomposed form uses that factorization
for all symbol intervals at once; the direct form rebuilds the filter for
every u and is kept as a reference.
"""

__author__ = 'islnoma'

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from islnoma import constants
from islnoma.exceptions import DomainException, ShapeException

log = logging.getLogger('islnoma.receiver')

_CONSTELLATIONS = {
    constants.ALPHABET_QPSK: np.array([complex(a, b) for a in (-1, 1) for b in (-1, 1)]) / math.sqrt(2.0),
    constants.ALPHABET_QAM16: np.array([complex(a, b) for a in (-3, -1, 1, 3) for b in (-3, -1, 1, 3)])
    / math.sqrt(10.0),
    constants.ALPHABET_GAUSSIAN: None,
}


@dataclass
class SicTrace:
    """
    Outcome of the ordering: decode order (column positions), the SINR of each decoded stream
    at its stage, log2(1 + SINR) per stage and, optionally, the stage MMSE filters.
    """
    order: tuple
    sinrs: tuple
    log_gains: tuple
    filters: list = None


@dataclass(frozen=True, eq=False)
class SymbolFrame:
    b: np.ndarray
    alphabet: str

    @property
    def points(self):
        return constellation(self.alphabet)


def constellation(alphabet):
    """
    Unit average energy points of an alphabet, None for the Gaussian codebook.
    """
    try:
        return _CONSTELLATIONS[alphabet]
    except KeyError:
        raise DomainException("unknown symbol alphabet '%s'" % alphabet)


def draw_symbols(alphabet, shape, rng):
    points = constellation(alphabet)
    if points is None:
        return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)
    return points[rng.integers(0, len(points), size=shape)]


def slice_symbols(z, alphabet):
    """
    Minimum distance decisions. Gaussian codebook estimates are returned unchanged.
    """
    points = constellation(alphabet)
    z = np.asarray(z, dtype=complex)
    if points is None:
        return z
    return points[np.argmin(np.abs(z[..., None] - points), axis=-1)]


def mmse_filter(H, sigma2):
    """
    F = H^H (H H^H + sigma2 I)^-1.

    :param H: S x M channel
    :returns: M x S filter
    """
    if not sigma2 > 0:
        raise DomainException("noise variance must be positive (got %r)" % sigma2)
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    gram = H @ H.conj().T + sigma2 * np.eye(H.shape[0])
    return linalg.cho_solve(linalg.cho_factor(gram, lower=True), H).conj().T


def _inverse_diagonal(H, sigma2):
    # diagonal of (I + H^H H / sigma2)^-1
    M = H.shape[1]
    gram = np.eye(M) + (H.conj().T @ H) / sigma2
    return np.real(np.diag(linalg.cho_solve(linalg.cho_factor(gram, lower=True), np.eye(M))))


def sinr_per_stream(H, sigma2):
    """
    SINR of each column at the output of the MMSE filter, the other columns being interference.
    """
    if not sigma2 > 0:
        raise DomainException("noise variance must be positive (got %r)" % sigma2)
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    return np.maximum(1.0 / _inverse_diagonal(H, sigma2) - 1.0, 0.0)


def _argmax_lowest(values, rtol=1e-12):
    best = np.max(values)
    return int(np.flatnonzero(values >= best - rtol * abs(best))[0])


def sic_order(H, sigma2, order=None, keep_filters=False):
    """
    Run the SIC stages analytically (correct decisions assumed).

    :param order: forced decode order of column positions; max-SINR with ties to the lowest position by default
    :returns: SicTrace
    """
    if not sigma2 > 0:
        raise DomainException("noise variance must be positive (got %r)" % sigma2)
    H = np.atleast_2d(np.asarray(H, dtype=complex))
    M = H.shape[1]
    if order is not None and sorted(order) != list(range(M)):
        raise ShapeException("decode order %r is not a permutation of %d columns" % (order, M))
    remaining = list(range(M))
    decoded, sinrs, gains, filters = [], [], [], []
    for m in range(M):
        Hr = H[:, remaining]
        inv = _inverse_diagonal(Hr, sigma2)
        sinr = np.maximum(1.0 / inv - 1.0, 0.0)
        pos = _argmax_lowest(sinr) if order is None else remaining.index(order[m])
        decoded.append(remaining[pos])
        sinrs.append(float(sinr[pos]))
        gains.append(float(-np.log2(inv[pos])))
        if keep_filters:
            filters.append(mmse_filter(Hr, sigma2))
        remaining.pop(pos)
    return SicTrace(order=tuple(decoded), sinrs=tuple(sinrs), log_gains=tuple(gains),
                    filters=filters if keep_filters else None)


def decomposed_filter(gc, sigma2, remaining=None):
    """
    Static MMSE filter of the remaining columns and the matching Doppler compensation.

    :param remaining: column positions still undecoded, all of them by default
    :returns: (F, compensator) where compensator(u) is the diagonal conj(e^{j2pi S nu u}) of those columns,
        so that compensator(u)[:, None] * F is the direct filter of H[u]
    """
    positions = list(range(gc.L)) if remaining is None else list(remaining)
    F = mmse_filter(gc.H[:, positions], sigma2)

    def compensator(u):
        return np.conj(gc.doppler_phases(u))[..., positions]

    return F, compensator


def _detect_decomposed(received, gc, sigma2, alphabet, symbols, trace):
    N0 = received.shape[1]
    phases = gc.doppler_phases(np.arange(N0))
    residual = received.copy()
    decided = np.zeros((gc.L, N0), dtype=complex)
    remaining = list(range(gc.L))
    for m, col in enumerate(trace.order):
        F, compensate = decomposed_filter(gc, sigma2, remaining)
        z = compensate(np.arange(N0))[:, remaining.index(col)] * (F[remaining.index(col)] @ residual)
        decided[col] = slice_symbols(z, alphabet)
        cancel = decided[col] if symbols is None else symbols[col]
        residual -= np.outer(gc.H[:, col], phases[:, col] * cancel)
        remaining.remove(col)
    return decided


def _detect_direct(received, gc, sigma2, alphabet, symbols):
    N0 = received.shape[1]
    decided = np.zeros((gc.L, N0), dtype=complex)
    for u in range(N0):
        Hu = gc.at(u)
        r = received[:, u].copy()
        remaining = list(range(gc.L))
        while remaining:
            Hr = Hu[:, remaining]
            pos = _argmax_lowest(sinr_per_stream(Hr, sigma2))
            col = remaining[pos]
            decided[col, u] = slice_symbols(mmse_filter(Hr, sigma2)[pos] @ r, alphabet)
            cancel = decided[col, u] if symbols is None else symbols[col, u]
            r -= Hu[:, col] * cancel
            remaining.pop(pos)
    return decided


def sic_detect(received, gc, sigma2, alphabet=constants.ALPHABET_QPSK, mode=constants.DETECT_SLICER,
               form=constants.FORM_DECOMPOSED, symbols=None, keep_filters=False):
    """
    Detect the symbols of a group from whitened received blocks.

    :param received: S x N0 whitened samples, one column per symbol interval
    :param gc: GroupChannel of the group
    :param mode: 'slicer' cancels the decisions, 'genie' cancels the true symbols
    :param form: 'decomposed' (static filters and Doppler compensation) or 'direct' (filter rebuilt per interval)
    :param symbols: true L x N0 symbols or SymbolFrame, needed in genie mode and for the Gaussian codebook
    :returns: (decided L x N0 symbols, SicTrace)
    """
    received = np.asarray(received, dtype=complex)
    if received.ndim == 1:
        received = received[:, None]
    if received.ndim != 2 or received.shape[0] != gc.S:
        raise ShapeException("received blocks of shape %s do not match S=%d" % (received.shape, gc.S))
    if isinstance(symbols, SymbolFrame):
        symbols = symbols.b
    genie = mode == constants.DETECT_GENIE or constellation(alphabet) is None
    if mode not in (constants.DETECT_SLICER, constants.DETECT_GENIE):
        raise DomainException("unknown detection mode '%s'" % mode)
    if genie:
        if symbols is None:
            raise DomainException("genie-aided cancellation needs the transmitted symbols")
        symbols = np.asarray(symbols, dtype=complex)
        if symbols.shape != (gc.L, received.shape[1]):
            raise ShapeException("symbols of shape %s do not match %d streams x %d intervals"
                                 % (symbols.shape, gc.L, received.shape[1]))
    else:
        symbols = None

    trace = sic_order(gc.H, sigma2, keep_filters=keep_filters)
    log.debug("group %s: decode order %s, SINRs %s", gc.members, trace.order, trace.sinrs)
    if form == constants.FORM_DECOMPOSED:
        decided = _detect_decomposed(received, gc, sigma2, alphabet, symbols, trace)
    elif form == constants.FORM_DIRECT:
        decided = _detect_direct(received, gc, sigma2, alphabet, symbols)
    else:
        raise DomainException("unknown receiver form '%s'" % form)
    return decided, trace


def simulate_group_transmission(gc, pm, sigma2, n_symbols, seed=None, alphabet=constants.ALPHABET_QPSK):
    """
    Whitened received blocks of a group over n_symbols intervals.

    The pre-whitening samples P V A E[u] b[u] / sqrt(rho) receive coloured noise of covariance
    sigma2 C_pp and are whitened with T_pp^-1, so the result follows H[u] b[u] + w with white w.

    :param gc: GroupChannel built from pm
    :returns: (S x n_symbols received blocks, SymbolFrame)
    """
    if n_symbols < 1:
        raise DomainException("at least one symbol interval is needed")
    if sigma2 < 0:
        raise DomainException("noise variance must not be negative (got %r)" % sigma2)
    rng = np.random.default_rng(seed)
    b = draw_symbols(alphabet, (gc.L, n_symbols), rng)
    phases = gc.doppler_phases(np.arange(n_symbols))
    samples = pm.P_diag @ (gc.V @ (gc.A_diag @ (phases.T * b))) / math.sqrt(gc.rho)
    white = (rng.standard_normal((gc.S, n_symbols)) + 1j * rng.standard_normal((gc.S, n_symbols)))
    samples = samples + pm.T_pp @ (math.sqrt(sigma2 / 2.0) * white)
    received = linalg.solve_triangular(pm.T_pp, samples, lower=True)
    return received, SymbolFrame(b=b, alphabet=alphabet)


def symbol_error_rate(decided, frame):
    """
    Fraction of wrong decisions per stream.
    """
    b = frame.b if isinstance(frame, SymbolFrame) else np.asarray(frame)
    if np.shape(decided) != b.shape:
        raise ShapeException("decisions of shape %s do not match symbols %s" % (np.shape(decided), b.shape))
    return np.mean(np.abs(np.asarray(decided) - b) > 1e-9, axis=1)
