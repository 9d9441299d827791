"""Explicit commuting actions: companion matrices, unit pairs, quartic and block examples."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DegenerateExponentError, InvalidParameterError, SingularCompanionError
from .lattice import IntMatrix, IntPolynomial, LatticeAction, is_ergodic


def companion_matrix(P: IntPolynomial) -> IntMatrix:
    """Companion matrix with last row (-a_0, ..., -a_{n-1}) of the monic normalisation of P."""
    c = list(P.coeffs)
    n = len(c) - 1
    if n < 2:
        raise InvalidParameterError("companion matrix needs degree >= 2")
    if abs(c[-1]) != 1:
        raise InvalidParameterError("polynomial must be monic up to sign")
    if c[0] == 0:
        raise SingularCompanionError("zero constant term gives a singular companion matrix")
    c = [x * c[-1] for x in c]  # leading coefficient +1
    rows = [[int(j == i + 1) for j in range(n)] for i in range(n - 1)]
    rows.append([-x for x in c[:-1]])
    return IntMatrix(rows)


@dataclass(frozen=True)
class UnitPair:
    action: LatticeAction
    M: IntMatrix
    dets: tuple

    @property
    def generators(self):
        return self.action.generators


def units_pair(P: IntPolynomial, P1: IntPolynomial, P2: IntPolynomial) -> UnitPair:
    """Generators P1(M), P2(M) for the companion M of P."""
    M = companion_matrix(P)
    A1, A2 = P1.evaluate_matrix(M), P2.evaluate_matrix(M)
    assert A1.commutes_with(M) and A2.commutes_with(M)
    return UnitPair(LatticeAction((A1, A2)), M, (A1.det, A2.det))


@dataclass(frozen=True)
class QuarticPair:
    action: LatticeAction
    char_poly_A: IntPolynomial
    char_poly_B: IntPolynomial


def quartic_pair(a: int, b: int) -> QuarticPair:
    """A = companion of X^4 + aX^3 + bX^2 + aX + 1 and B = A + I.

    The reciprocal quartic factors as (X^2 + uX + 1)(X^2 + vX + 1) with
    u + v = a, uv = b - 2.  One real pair lambda, 1/lambda and one pair on
    the unit circle need |u| > 2 > |v|, which amounts to a > 4, b > 2 and
    2a > b + 2.  The last inequality keeps P(-1) = 2 - 2a + b negative.
    """
    if not a > 4:
        raise InvalidParameterError(f"a > 4 violated (a={a})")
    if not b > 2:
        raise InvalidParameterError(f"2 < b violated (b={b})")
    if not 4 * b < a * a + 8:
        raise InvalidParameterError(f"b < a^2/4 + 2 violated (a={a}, b={b})")
    if not 2 * a > b + 2:
        raise InvalidParameterError(f"2a > b + 2 violated (a={a}, b={b}); X = -1 would not be separated")
    P = IntPolynomial((1, a, b, a, 1))
    A = companion_matrix(P)
    B = A + IntMatrix.identity(4)
    return QuarticPair(LatticeAction((A, B)), P, B.char_poly())


def block_action(M1: IntMatrix, M2: IntMatrix, p, q) -> LatticeAction:
    """A_1 = diag(M1^p1, M2^q1), A_2 = diag(M1^p2, M2^q2)."""
    p1, p2 = p
    q1, q2 = q
    if p1 * q2 - p2 * q1 == 0:
        raise DegenerateExponentError("p1*q2 - p2*q1 = 0")
    if not (is_ergodic(M1) and is_ergodic(M2)):
        raise InvalidParameterError("both blocks must be ergodic")
    unimodular = M1.is_unimodular and M2.is_unimodular
    if not unimodular and min(p1, p2, q1, q2) < 0:
        raise InvalidParameterError("negative exponents need unimodular blocks")
    A1 = IntMatrix.diag_blocks(M1 ** p1, M2 ** q1)
    A2 = IntMatrix.diag_blocks(M1 ** p2, M2 ** q2)
    return LatticeAction((A1, A2))


def _poly(*desc):
    return IntPolynomial.from_descending(desc)


CUBIC_12_10 = dict(P=_poly(1, 0, -12, -10), P1=_poly(1, -3, -3), P2=_poly(-1, 1, 11))
CUBIC_9_2 = dict(P=_poly(1, 0, -9, -2), P1=_poly(3, -9, -1), P2=_poly(2, -4, -1))
CUBIC_9_2_ALT = dict(P=_poly(1, 0, -9, -2), P1=_poly(85, -245, -59), P2=_poly(-18, 4, 161))

GOLDEN = IntMatrix([[2, 1], [1, 1]])


def named_example(name: str) -> LatticeAction:
    """Look up a catalog action by name (see ``EXAMPLES``)."""
    try:
        return EXAMPLES[name]()
    except KeyError:
        raise InvalidParameterError(
            f"unknown example {name!r}; choose from {sorted(EXAMPLES)}") from None


EXAMPLES = {
    "cubic-12-10": lambda: units_pair(**CUBIC_12_10).action,
    "cubic-9-2": lambda: units_pair(**CUBIC_9_2).action,
    "cubic-9-2-alt": lambda: units_pair(**CUBIC_9_2_ALT).action,
    "quartic-5-7": lambda: quartic_pair(5, 7).action,
    "block-golden-cubic": lambda: block_action(GOLDEN, units_pair(**CUBIC_12_10).action.generators[0], (1, 0), (0, 1)),
    "block-golden-golden": lambda: block_action(GOLDEN, GOLDEN, (1, 0), (0, 1)),
    "doubling": lambda: LatticeAction((IntMatrix([[2]]),)),
    "golden": lambda: LatticeAction((GOLDEN,)),
}
