"""Factorization certificates and their independent re-verification."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import reduce

from .decomposition import Decomposition
from .errors import DimensionMismatch, FactorNotIdempotent, ProductMismatch
from .matrix import Matrix, residual, residual_to_json


@dataclass(frozen=True, eq=False)
class FactorizationCertificate:
    """``target = factors[0] @ factors[1] @ ...`` with every factor idempotent.

    The number of factors is an upper bound on the idempotent index of the
    target.
    """

    target: Matrix
    factors: tuple
    recipe: str
    decomposition: Decomposition | None = None
    parameters: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a certificate needs at least one factor")
        for f in self.factors:
            self.target._check_field(f)
            if f.shape != self.target.shape:
                raise DimensionMismatch(f"factor of shape {f.shape} for a {self.target.shape} target")

    @property
    def field(self):
        return self.target.field

    @property
    def index_upper_bound(self) -> int:
        return len(self.factors)

    def product(self) -> Matrix:
        return reduce(lambda a, b: a @ b, self.factors)

    def residuals(self) -> dict:
        return {
            "idempotency": [residual(f @ f - f) for f in self.factors],
            "product": residual(self.product() - self.target),
        }

    def to_json(self) -> dict:
        res = self.residuals()
        return {
            "target": self.target.to_json(),
            "decomposition": None if self.decomposition is None else self.decomposition.to_json(),
            "factors": [f.to_json() for f in self.factors],
            "recipe": self.recipe,
            "parameters": {k: v.to_json() for k, v in self.parameters.items()},
            "residuals": {
                "idempotency": [residual_to_json(r) for r in res["idempotency"]],
                "product": residual_to_json(res["product"]),
            },
            "index_upper_bound": self.index_upper_bound,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FactorizationCertificate":
        factors = [Matrix.from_json(f) for f in obj["factors"]]
        dec = obj.get("decomposition")
        kind = TwoIdempotentCertificate if len(factors) == 2 else FactorizationCertificate
        return kind(
            target=Matrix.from_json(obj["target"]),
            factors=tuple(factors),
            recipe=str(obj.get("recipe", "unknown")),
            decomposition=None if dec is None else Decomposition.from_json(dec),
            parameters={k: Matrix.from_json(v) for k, v in (obj.get("parameters") or {}).items()},
        )


@dataclass(frozen=True, eq=False)
class TwoIdempotentCertificate(FactorizationCertificate):
    def __post_init__(self):
        super().__post_init__()
        if len(self.factors) != 2:
            raise ValueError("two-idempotent certificate needs exactly two factors")

    @property
    def E1(self) -> Matrix:
        return self.factors[0]

    @property
    def E2(self) -> Matrix:
        return self.factors[1]


@dataclass(frozen=True)
class VerificationReport:
    ok: bool
    residuals: dict
    failures: list

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "residuals": {
                "idempotency": [residual_to_json(r) for r in self.residuals["idempotency"]],
                "product": residual_to_json(self.residuals["product"]),
            },
            "failures": list(self.failures),
        }


def verify_certificate(cert: FactorizationCertificate, tol: float = 1e-9) -> VerificationReport:
    """Recompute every residual from the stored matrices.

    Exact fields must give exact zeros.  Over F64 a factor passes when
    ``||E^2 - E||_F <= tol * max(1, ||E||_F)`` and the product when its error
    is at most ``tol`` times the largest of 1, ``||T||_F`` and the product of
    the factor norms.
    """
    exact = cert.field.exact
    res = cert.residuals()
    failures = []
    for i, (f, r) in enumerate(zip(cert.factors, res["idempotency"])):
        bound = 0 if exact else tol * max(1.0, f.frobenius_norm())
        if r > bound:
            failures.append(f"factor {i} is not idempotent (residual {r})")
    if exact:
        bound = 0
    else:
        norms = 1.0
        for f in cert.factors:
            norms *= f.frobenius_norm()
        bound = tol * max(1.0, cert.target.frobenius_norm(), norms)
    if res["product"] > bound:
        failures.append(f"product of factors differs from target (residual {res['product']})")
    return VerificationReport(not failures, res, failures)


def checked(cert: FactorizationCertificate, tol: float = 1e-9) -> FactorizationCertificate:
    """Return ``cert`` after verifying it; raise if any residual is off."""
    report = verify_certificate(cert, tol)
    if not report.ok:
        if any("idempotent" in f for f in report.failures):
            raise FactorNotIdempotent("; ".join(report.failures))
        raise ProductMismatch("; ".join(report.failures))
    return cert
