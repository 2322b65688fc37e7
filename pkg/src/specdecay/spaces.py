"""Rank-one compact symmetric spaces: eigenvalues, shift rho, parity, Jacobi parameters.

All catalog arithmetic is done in :class:`fractions.Fraction`, so the
identities ``c_n + rho^2 = (n + rho)^2`` are checked exactly.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvariantViolation, ParameterError
from .expansion import BasisDescriptor, JacobiCompact

ALL_INTEGERS = "AllIntegers"
EVEN_INTEGERS = "EvenIntegers"


@dataclass(frozen=True)
class SpaceCatalogEntry:
    name: str
    d: int
    m: int | None
    rho: Fraction
    parity: str
    alpha: Fraction
    beta: Fraction
    dimension: int

    @property
    def growth_exponent(self) -> int:
        """``k`` in ``d_n <= C (n + rho)^k``: the real dimension minus one."""
        return self.dimension - 1

    @property
    def step(self) -> int:
        return 2 if self.parity == EVEN_INTEGERS else 1

    def indices(self, N: int) -> range:
        """Spectral indices ``n <= N`` allowed by the parity."""
        return range(0, N + 1, self.step)

    def eigenvalue(self, n: int) -> Fraction:
        """``c_n`` from the per-family closed form."""
        if self.parity == EVEN_INTEGERS and n % 2:
            raise ParameterError(f"{self.name} has no odd spectral index {n}")
        if self.m is None:
            return Fraction(n * (n + self.d - 1))
        return Fraction(n * (n + self.m + self.d))

    def jacobi_eigenvalue(self, n: int) -> Fraction:
        """``n (n + alpha + beta + 1)``, the Jacobi-operator eigenvalue."""
        return n * (n + self.alpha + self.beta + 1)

    def basis(self, K: int) -> BasisDescriptor:
        """Zonal basis ``R_n(cos s)`` over the parity set, ``K + 1`` functions."""
        return BasisDescriptor(JacobiCompact(float(self.alpha), float(self.beta), self.step), K)


_PATTERN = re.compile(r"^\s*(\w+)\s*(?:\(\s*(\d+)\s*\))?\s*$")


def catalog(name: str, param: int | None = None) -> SpaceCatalogEntry:
    """Look up an entry by ``("Sphere", 3)`` or by the string ``"Sphere(3)"``."""
    if param is None:
        match = _PATTERN.match(name)
        if not match:
            raise ParameterError(f"unrecognised space {name!r}")
        name, raw = match.groups()
        param = None if raw is None else int(raw)
    half = Fraction(1, 2)
    if name in ("Sphere", "RealProjective"):
        if param is None or param < 1:
            raise ParameterError(f"{name} needs d >= 1, got {param}")
        d = param
        a = Fraction(d - 2, 2)
        return SpaceCatalogEntry(
            f"{name}({d})", d, None, half * (d - 1),
            ALL_INTEGERS if name == "Sphere" else EVEN_INTEGERS, a, a, d)
    if name in ("ComplexProjective", "QuaternionicProjective"):
        if param is None or param < 2:
            raise ParameterError(f"{name} needs l >= 2, got {param}")
        l = param
        if name == "ComplexProjective":
            d, m, a, b, dim = 2, l - 2, Fraction(l - 1), Fraction(0), 2 * l
        else:
            d, m, a, b, dim = 4, 2 * l - 3, Fraction(2 * l - 1), Fraction(1), 4 * l
        return SpaceCatalogEntry(f"{name}({l})", d, m, half * (m + d), ALL_INTEGERS, a, b, dim)
    if name == "CayleyPlane":
        if param is not None:
            raise ParameterError("CayleyPlane takes no parameter")
        return SpaceCatalogEntry("CayleyPlane", 8, 3, Fraction(11, 2), ALL_INTEGERS,
                                 Fraction(7), Fraction(3), 16)
    raise ParameterError(f"unknown space {name!r}")


def standard_entries() -> list[SpaceCatalogEntry]:
    """One representative of each of the five families."""
    return [catalog("Sphere", 2), catalog("RealProjective", 3), catalog("ComplexProjective", 2),
            catalog("QuaternionicProjective", 2), catalog("CayleyPlane")]


@dataclass(frozen=True)
class RhoReport:
    name: str
    N: int
    max_defect: Fraction
    max_jacobi_defect: Fraction
    sandwich_ok: bool
    increasing: bool

    @property
    def ok(self) -> bool:
        return (self.max_defect == 0 and self.max_jacobi_defect == 0
                and self.sandwich_ok and self.increasing)


def verify_rho_identity(entry: SpaceCatalogEntry, N: int, strict: bool = True) -> RhoReport:
    """Check ``c_n + rho^2 = (n+rho)^2``, ``n^2 <= c_n <= (n+rho)^2`` and the Jacobi match."""
    rho = entry.rho
    defect = Fraction(0)
    jdefect = Fraction(0)
    sandwich = True
    increasing = True
    prev = None
    for n in entry.indices(N):
        c = entry.eigenvalue(n)
        defect = max(defect, abs(c + rho * rho - (n + rho) ** 2))
        jdefect = max(jdefect, abs(c - entry.jacobi_eigenvalue(n)))
        sandwich &= n * n <= c <= (n + rho) ** 2
        if prev is not None:
            increasing &= c > prev
        prev = c
    report = RhoReport(entry.name, N, defect, jdefect, sandwich, increasing)
    if strict and not report.ok:
        raise InvariantViolation(f"catalog identity failed for {entry.name}: {report}")
    return report


def catalog_csv(entries=None) -> str:
    """CSV dump with columns name, d, m, rho, alpha, beta, parity."""
    entries = standard_entries() if entries is None else entries
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "d", "m", "rho", "alpha", "beta", "parity"])
    for e in entries:
        w.writerow([e.name, e.d, "" if e.m is None else e.m, str(e.rho), str(e.alpha), str(e.beta), e.parity])
    return buf.getvalue()
