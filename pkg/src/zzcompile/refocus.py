"""Echo scheduling: expand a selective coupling block into delays and pi pulses.

Each spin carries a +-1 sign row over m equal segments.  The target pair
shares one row (their coupling runs at full speed); every other spin gets a
row orthogonal to all assigned rows, so all other couplings and every
chemical shift average to zero.  Because the free Hamiltonian is diagonal,
the cancellation is exact, not merely first order.

Default rows are square waves with flips at odd multiples of m/2^(i+1):
the pair flips once at the midpoint, the next spin at the quarter points,
and so on (one group of pulses per boundary).  For m=8, n=4 this gives
rows ++++----, ++--++-- ... specifically ++------++ style patterns matching
the classic eight-segment scheme.  When m is too small for that family but
still admits n-1 orthogonal zero-sum rows, distinct Walsh rows in sequency
order are used instead.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .molecule import SpinSystem
from .sequence import FreeDelay, PulseSequence, Rotation


class RefocusError(ValueError):
    pass


@dataclass(frozen=True)
class TogglingPattern:
    matrix: tuple            # n rows of +-1 over m segments
    target_pair: tuple
    segments: int

    def row(self, spin: int) -> tuple:
        return self.matrix[spin - 1]

    def validate(self):
        n = len(self.matrix)
        m = self.segments
        k, l = self.target_pair
        for r in self.matrix:
            if sum(r) != 0:
                raise RefocusError("row does not refocus the chemical shift")
            if r[0] != 1:
                raise RefocusError("row must start at +1")
        if self.matrix[k - 1] != self.matrix[l - 1]:
            raise RefocusError("target-pair rows must be identical")
        for a in range(n):
            for b in range(a + 1, n):
                if (a + 1, b + 1) == self.target_pair:
                    continue
                if sum(x * y for x, y in zip(self.matrix[a], self.matrix[b])) != 0:
                    raise RefocusError(f"coupling ({a+1},{b+1}) not cancelled")
        return self

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("spin," + ",".join(f"seg{j+1}" for j in range(self.segments)) + "\n")
        for i, row in enumerate(self.matrix):
            buf.write(f"{i+1}," + ",".join(f"{v:+d}" for v in row) + "\n")
        return buf.getvalue()


def _square_wave_row(m: int, level: int) -> tuple:
    """Row starting at +1 with flips at odd multiples of m >> (level+1)."""
    half_period = m >> (level + 1)
    return tuple(
        1 - 2 * (((j + half_period) // (2 * half_period)) % 2) for j in range(m)
    )


def _walsh_rows_sequency(m: int):
    """Non-constant rows of the order-m Sylvester matrix, fewest sign changes first."""
    h = np.array([[1]])
    while h.shape[0] < m:
        h = np.block([[h, h], [h, -h]])
    rows = [tuple(int(v) for v in r) for r in h]
    rows = [r for r in rows if sum(r) == 0]
    rows.sort(key=lambda r: sum(a != b for a, b in zip(r, r[1:])))
    return rows


def toggling_patterns(n: int, pair, m: int) -> TogglingPattern:
    """Assign one sign row per spin for a selective [tau_kl] echo schedule."""
    k, l = pair
    if k == l or not (1 <= k <= n and 1 <= l <= n):
        raise RefocusError(f"invalid target pair {pair!r}")
    pair = (min(k, l), max(k, l))
    if m < 2 or m & (m - 1):
        raise RefocusError("segment count must be a power of two >= 2")
    needed = n - 1
    if m - 1 < needed:
        raise RefocusError(
            f"insufficient orthogonal rows: m={m} admits {m-1}, need {needed}"
        )
    if m >= 2 ** (n - 1):
        rows = [_square_wave_row(m, i) for i in range(needed)]
    else:
        rows = _walsh_rows_sequency(m)[:needed]
    matrix = [None] * n
    matrix[pair[0] - 1] = rows[0]
    matrix[pair[1] - 1] = rows[0]
    nxt = 1
    for s in range(n):
        if matrix[s] is None:
            matrix[s] = rows[nxt]
            nxt += 1
    return TogglingPattern(tuple(matrix), pair, m).validate()


def refocus_block(sys: SpinSystem, pair, tau: float, m: int = 8) -> PulseSequence:
    """Echo schedule whose net propagator is the selective block [tau_kl].

    Emits m equal free delays; at every segment boundary (including the
    terminal one) a single pi pulse along y is applied jointly to all spins
    whose sign row flips there, so each row returns to +1 at the end.
    """
    k, l = pair
    if sys.coupling(k, l) == 0:
        raise RefocusError(f"target pair {pair!r} has zero coupling")
    if tau <= 0:
        raise RefocusError("block duration must be positive")
    pattern = toggling_patterns(sys.n, pair, m)
    instructions = []
    for seg in range(m):
        instructions.append(FreeDelay(tau / m))
        flipping = [
            s + 1
            for s in range(sys.n)
            if pattern.matrix[s][seg] != (pattern.matrix[s][seg + 1] if seg + 1 < m else 1)
        ]
        if flipping:
            instructions.append(Rotation(spins=tuple(flipping), axis="y", angle=np.pi))
    return PulseSequence(
        instructions,
        name=f"refocus-{pair[0]}{pair[1]}",
        description=f"selective [tau_{pair[0]}{pair[1]}] over {m} segments, tau={tau!r}",
    )
