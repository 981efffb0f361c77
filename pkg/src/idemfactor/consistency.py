"""Matrix equations deciding when the peeled factor gives a two-idempotent split.

For a local operator ``T = [[T1, T2], [0, 0]]`` and parameters
``B: L -> K``, ``C: K -> L``, ``D: L -> L`` put

    Q_B = [[I, B], [0, 0]]        S = [[T1 - B C, T2 - B D], [C, D]]

Then ``Q_B S = T`` always, and ``T = Q_B S`` is a product of two
idempotents as soon as ``S`` is idempotent.  Writing ``U = T1 - B C`` and
``V = T2 - B D``, the block equations of ``S^2 = S`` and ``T S = T`` are

    top-left      U^2 + V C = U          VC = (I - U) U
    top-right     U V + V D = V          UV = V (I - D)
    bottom-left   C U + D C = C          CU = (I - D) C
    bottom-right  C V + D^2 = D          CV = D (I - D)
    TS-left       T1 U + T2 C = T1       T2 C = T1 (I - U)
    TS-right      T1 V + T2 D = T2       T1 V = T2 (I - D)

(left column as sums, right column rearranged).  Since
``TS-left - top-left = B * bottom-left`` and
``TS-right - top-right = B * bottom-right``, the two bottom equations plus
any choice of one left and one right equation is equivalent to the full set.

Every residual is computed from its own formula, so the equivalences can be
tested rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .certificate import TwoIdempotentCertificate
from .decomposition import Decomposition
from .errors import DimensionMismatch
from .fields import DEFAULT_RTOL
from .matrix import Matrix, block2x2, inverse, is_invertible

# Equation keys.  Sum form first, rearranged form second.
SUM_FORM = (
    "U^2+VC=U",
    "UV+VD=V",
    "CU+DC=C",
    "CV+D^2=D",
    "T1U+T2C=T1",
    "T1V+T2D=T2",
)
REARRANGED_FORM = (
    "VC=(I-U)U",
    "UV=V(I-D)",
    "CU=(I-D)C",
    "CV=D(I-D)",
    "T2C=T1(I-U)",
    "T1V=T2(I-D)",
)

TOP_LEFT, TOP_RIGHT, BOTTOM_LEFT, BOTTOM_RIGHT, TS_LEFT, TS_RIGHT = range(6)


def _systems(prefix: str, names: tuple) -> dict[str, tuple]:
    return {
        f"{prefix}:S_blocks": names[:4],
        f"{prefix}:S_blocks+TS": names,
        f"{prefix}:bottom+TS": (names[BOTTOM_LEFT], names[BOTTOM_RIGHT], names[TS_LEFT], names[TS_RIGHT]),
        f"{prefix}:bottom+top_left+TS_right": (
            names[BOTTOM_LEFT], names[BOTTOM_RIGHT], names[TOP_LEFT], names[TS_RIGHT],
        ),
        f"{prefix}:bottom+top_right+TS_left": (
            names[BOTTOM_LEFT], names[BOTTOM_RIGHT], names[TOP_RIGHT], names[TS_LEFT],
        ),
    }


EQUATION_SYSTEMS = {**_systems("sum", SUM_FORM), **_systems("rearranged", REARRANGED_FORM)}

# The three reduced sets for each form; each is equivalent to the full S_blocks+TS set.
REDUCED_SYSTEMS = tuple(
    name for name in EQUATION_SYSTEMS if name.split(":")[1].startswith("bottom")
)


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    """Residuals of every equation and the truth value of every named system.

    ``systems`` keys:

    * ``S_idempotent`` -- S squared directly;
    * ``S_idempotent_and_TS=T`` -- the same plus ``T S = T``;
    * ``sum:*`` / ``rearranged:*`` -- the equation sets listed in
      :data:`EQUATION_SYSTEMS`;
    * ``defect_annihilated_by_C`` -- ``C (T1 - T2 C) = 0``;
    * ``defect_fixed_by_T1`` -- ``(I - T1)(T1 - T2 C) = 0``;
    * ``corner_balance`` -- ``T1 T2 - T2 = (T1 B - T2) D``, plus the
      specializations ``corner_balance[B=T2]`` and ``corner_balance[B=T2D]``;
    * ``invertible_balance`` -- C, D invertible and ``T1 C^-1 = T2 D^-1``.
    """

    T1: Matrix
    T2: Matrix
    B: Matrix
    C: Matrix
    D: Matrix
    equations: dict
    systems: dict
    tol: float

    @property
    def S(self) -> Matrix:
        """Peeled factor in block coordinates."""
        return peel_blocks(self.T1, self.T2, self.B, self.C, self.D)

    @property
    def Q_B(self) -> Matrix:
        k, l = self.T2.shape
        f = self.T1.field
        return block2x2(Matrix.identity(k, f), self.B, Matrix.zeros(l, k, f), Matrix.zeros(l, l, f))

    @property
    def T(self) -> Matrix:
        k, l = self.T2.shape
        f = self.T1.field
        return block2x2(self.T1, self.T2, Matrix.zeros(l, k, f), Matrix.zeros(l, l, f))

    def certificate(self) -> TwoIdempotentCertificate | None:
        """``(Q_B, S)`` in block coordinates when S is idempotent, else ``None``."""
        if not self.systems["S_idempotent_and_TS=T"]:
            return None
        k, l = self.T2.shape
        return TwoIdempotentCertificate(
            target=self.T,
            factors=(self.Q_B, self.S),
            recipe="peeled_pair",
            decomposition=Decomposition.standard(k, l, self.T1.field),
            parameters={"B": self.B, "C": self.C, "D": self.D},
        )

    def to_json(self) -> dict:
        from .matrix import residual, residual_to_json

        return {
            "inputs": {n: getattr(self, n).to_json() for n in ("T1", "T2", "B", "C", "D")},
            "systems": dict(self.systems),
            "residuals": {
                k: (None if v is None else residual_to_json(residual(v)))
                for k, v in self.equations.items()
            },
        }


def peel_blocks(T1: Matrix, T2: Matrix, B: Matrix, C: Matrix, D: Matrix) -> Matrix:
    """``[[T1 - B C, T2 - B D], [C, D]]`` in block coordinates."""
    return block2x2(T1 - B @ C, T2 - B @ D, C, D)


def _check_shapes(T1, T2, B, C, D):
    k, l = T2.shape
    want = {"T1": (k, k), "T2": (k, l), "B": (k, l), "C": (l, k), "D": (l, l)}
    for name, m in zip(want, (T1, T2, B, C, D)):
        T1._check_field(m)
        if m.shape != want[name]:
            raise DimensionMismatch(f"{name} has shape {m.shape}, expected {want[name]}")
    return k, l


def check_consistency(
    T1: Matrix, T2: Matrix, B: Matrix, C: Matrix, D: Matrix, tol: float = 1e-9, rtol: float = DEFAULT_RTOL
) -> ConsistencyReport:
    k, l = _check_shapes(T1, T2, B, C, D)
    f = T1.field
    Ik, Il = Matrix.identity(k, f), Matrix.identity(l, f)
    U = T1 - B @ C
    V = T2 - B @ D

    eq: dict[str, Matrix | None] = {}
    eq["U^2+VC=U"] = U @ U + V @ C - U
    eq["UV+VD=V"] = U @ V + V @ D - V
    eq["CU+DC=C"] = C @ U + D @ C - C
    eq["CV+D^2=D"] = C @ V + D @ D - D
    eq["T1U+T2C=T1"] = T1 @ U + T2 @ C - T1
    eq["T1V+T2D=T2"] = T1 @ V + T2 @ D - T2
    eq["VC=(I-U)U"] = V @ C - (Ik - U) @ U
    eq["UV=V(I-D)"] = U @ V - V @ (Il - D)
    eq["CU=(I-D)C"] = C @ U - (Il - D) @ C
    eq["CV=D(I-D)"] = C @ V - D @ (Il - D)
    eq["T2C=T1(I-U)"] = T2 @ C - T1 @ (Ik - U)
    eq["T1V=T2(I-D)"] = T1 @ V - T2 @ (Il - D)

    S = peel_blocks(T1, T2, B, C, D)
    T = block2x2(T1, T2, Matrix.zeros(l, k, f), Matrix.zeros(l, l, f))
    eq["S^2=S"] = S @ S - S
    eq["TS=T"] = T @ S - T

    W = T1 - T2 @ C
    eq["C(T1-T2C)=0"] = C @ W
    eq["(I-T1)(T1-T2C)=0"] = (Ik - T1) @ W
    eq["T1T2-T2=(T1B-T2)D"] = (T1 @ T2 - T2) - (T1 @ B - T2) @ D
    eq["corner_balance[B=T2]"] = (T1 @ T2 - T2) - (T1 @ T2 - T2) @ D
    eq["corner_balance[B=T2D]"] = (T1 @ T2 - T2) - (T1 @ T2 @ D - T2) @ D
    if k == l and is_invertible(C, rtol) and is_invertible(D, rtol):
        eq["T1C^-1=T2D^-1"] = T1 @ inverse(C, rtol) - T2 @ inverse(D, rtol)
    else:
        eq["T1C^-1=T2D^-1"] = None

    scale = max(1.0, *(m.frobenius_norm() for m in (T1, T2, B, C, D)))
    eps = 0.0 if f.exact else tol * scale * scale * scale

    def holds(name: str) -> bool:
        m = eq[name]
        return m is not None and m.is_zero(eps)

    systems: dict[str, bool] = {}
    systems["S_idempotent"] = holds("S^2=S")
    systems["S_idempotent_and_TS=T"] = systems["S_idempotent"] and holds("TS=T")
    for name, members in EQUATION_SYSTEMS.items():
        systems[name] = all(holds(m) for m in members)
    systems["defect_annihilated_by_C"] = holds("C(T1-T2C)=0")
    systems["defect_fixed_by_T1"] = holds("(I-T1)(T1-T2C)=0")
    systems["corner_balance"] = holds("T1T2-T2=(T1B-T2)D")
    # The given B is ignored here: these substitute B = T2 and B = T2 D.
    systems["corner_balance[B=T2]"] = holds("corner_balance[B=T2]")
    systems["corner_balance[B=T2D]"] = holds("corner_balance[B=T2D]")
    systems["invertible_balance"] = holds("T1C^-1=T2D^-1")
    return ConsistencyReport(T1, T2, B, C, D, eq, systems, tol)
