"""Exact piecewise polynomials on a breakpoint grid.

Each piece stores ascending-power coefficients in *local* coordinates,
``p_i(u)`` with ``u = x - breakpoints[i]``.  Integration and
differentiation act on the coefficients directly, so no quadrature is ever
involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

MAX_DEGREE = 16
CONTINUITY_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class PiecewisePoly:
    """Compactly supported piecewise polynomial on ``[0, span]``.

    Parameters
    ----------
    breakpoints : array_like
        Strictly increasing, starting at 0 and ending at ``span``.
    coeffs : array_like, shape (n_pieces, degree + 1)
        Ascending-power coefficients of each piece in local coordinates.
    check_continuity : bool
        Reject value jumps at interior breakpoints.
    """

    breakpoints: np.ndarray
    coeffs: np.ndarray
    check_continuity: bool = True

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=np.float64)
        c = np.atleast_2d(np.asarray(self.coeffs, dtype=np.float64))
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least two breakpoints")
        if bp[0] != 0.0:
            raise ValueError("breakpoints must start at 0")
        if np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if c.shape[0] != bp.size - 1:
            raise ValueError(
                f"{bp.size - 1} intervals but {c.shape[0]} coefficient rows"
            )
        if c.shape[1] - 1 > MAX_DEGREE:
            raise ValueError(f"degree {c.shape[1] - 1} exceeds cap {MAX_DEGREE}")
        bp.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "coeffs", c)
        if self.check_continuity:
            jump = self.max_jump()
            scale = max(float(np.max(np.abs(self.node_values()))), 1e-300)
            if jump > CONTINUITY_RTOL * scale:
                raise ValueError(f"discontinuous at a breakpoint (jump {jump:.3e})")

    # ------------------------------------------------------------------
    @property
    def span(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    @property
    def n_pieces(self) -> int:
        return self.coeffs.shape[0]

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.breakpoints)

    def _end_values(self, coeffs: np.ndarray | None = None) -> np.ndarray:
        c = self.coeffs if coeffs is None else coeffs
        w = self.widths
        out = np.zeros(c.shape[0])
        for d in range(c.shape[1] - 1, -1, -1):
            out = out * w + c[:, d]
        return out

    def node_values(self) -> np.ndarray:
        """Left-limit and right-limit values at every breakpoint, flattened."""
        return np.concatenate([self.coeffs[:, 0], self._end_values()])

    def max_jump(self) -> float:
        if self.n_pieces == 1:
            return 0.0
        left = self._end_values()[:-1]
        right = self.coeffs[1:, 0]
        return float(np.max(np.abs(left - right)))

    # ------------------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        bp = self.breakpoints
        idx = np.clip(np.searchsorted(bp, x, side="right") - 1, 0, self.n_pieces - 1)
        u = x - bp[idx]
        c = self.coeffs
        val = np.zeros_like(u)
        for d in range(self.degree, -1, -1):
            val = val * u + c[idx, d]
        inside = (x >= 0.0) & (x <= bp[-1])
        out = np.where(inside, val, 0.0)
        return out if out.ndim else float(out)

    def derivative(self, order: int = 1) -> "PiecewisePoly":
        if order < 0:
            raise ValueError("order must be >= 0")
        c = self.coeffs
        for _ in range(order):
            if c.shape[1] == 1:
                c = np.zeros_like(c)
            else:
                c = c[:, 1:] * np.arange(1, c.shape[1])
        return PiecewisePoly(self.breakpoints, c, check_continuity=False)

    def integral(self) -> float:
        """Exact integral over ``[0, span]``, summed piece by piece."""
        return float(np.sum(self._end_values(integrate_rows(self.coeffs))))

    def piece_sup_abs(self) -> np.ndarray:
        """Exact ``max |p_i|`` on each piece (endpoints plus interior critical points)."""
        out = np.empty(self.n_pieces)
        for i, (row, w) in enumerate(zip(self.coeffs, self.widths)):
            cand = [0.0, w]
            der = P.polytrim(P.polyder(row), 0) if row.size > 1 else np.zeros(1)
            if der.size > 1:
                for r in P.polyroots(der):
                    if abs(r.imag) < 1e-12 and 0.0 < r.real < w:
                        cand.append(r.real)
            out[i] = np.max(np.abs(P.polyval(np.array(cand), row)))
        return out

    def lipschitz(self) -> float:
        """Exact Lipschitz constant of a continuous piecewise polynomial."""
        return float(np.max(self.derivative(1).piece_sup_abs()))

    def sup_abs(self) -> float:
        return float(np.max(self.piece_sup_abs()))

    # ------------------------------------------------------------------
    def scaled(self, factor: float) -> "PiecewisePoly":
        return PiecewisePoly(self.breakpoints, self.coeffs * factor, check_continuity=False)

    def shifted_value(self, constant: float) -> "PiecewisePoly":
        c = self.coeffs.copy()
        c[:, 0] += constant
        return PiecewisePoly(self.breakpoints, c, check_continuity=False)

    @classmethod
    def constant(cls, value: float, span: float) -> "PiecewisePoly":
        return cls(np.array([0.0, span]), np.array([[value]]))

    @classmethod
    def from_pieces(
        cls,
        pieces: Iterable[tuple[float, np.ndarray]],
        end: float,
        check_continuity: bool = True,
    ) -> "PiecewisePoly":
        """Assemble from ``(start, local_coeffs)`` pairs; ``end`` closes the last piece."""
        starts, rows = [], []
        for start, row in pieces:
            starts.append(float(start))
            rows.append(np.asarray(row, dtype=np.float64))
        deg = max(r.size for r in rows) - 1
        c = np.zeros((len(rows), deg + 1))
        for i, r in enumerate(rows):
            c[i, : r.size] = r
        return cls(np.array(starts + [float(end)]), c, check_continuity=check_continuity)

    def pieces(self, offset: float = 0.0) -> list[tuple[float, np.ndarray]]:
        return [(offset + s, row) for s, row in zip(self.breakpoints[:-1], self.coeffs)]


def integrate_rows(c: np.ndarray) -> np.ndarray:
    """Antiderivative of each coefficient row, zero constant term."""
    out = np.zeros((c.shape[0], c.shape[1] + 1))
    out[:, 1:] = c / np.arange(1, c.shape[1] + 1)
    return out


def concatenate(
    parts: Sequence[tuple[float, PiecewisePoly]], end: float, check_continuity: bool = True
) -> PiecewisePoly:
    """Place polynomials side by side; ``parts`` holds ``(offset, poly)`` in order."""
    pieces: list[tuple[float, np.ndarray]] = []
    for offset, poly in parts:
        pieces.extend(poly.pieces(offset))
    return PiecewisePoly.from_pieces(pieces, end, check_continuity)
