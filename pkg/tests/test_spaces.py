from fractions import Fraction

import pytest

from specdecay.errors import InvariantViolation, ParameterError
from specdecay.spaces import (
    ALL_INTEGERS,
    EVEN_INTEGERS,
    SpaceCatalogEntry,
    catalog,
    catalog_csv,
    standard_entries,
    verify_rho_identity,
)


def test_sphere_two_values():
    e = catalog("Sphere", 2)
    assert e.eigenvalue(1) == 2
    assert e.rho == Fraction(1, 2)


def test_complex_projective_two_values():
    e = catalog("ComplexProjective", 2)
    assert (e.m, e.d) == (0, 2)
    assert e.eigenvalue(1) == 3 and e.rho == 1
    assert e.eigenvalue(1) + e.rho ** 2 == (1 + e.rho) ** 2


def test_cayley_plane():
    e = catalog("CayleyPlane")
    assert (e.d, e.m, e.rho) == (8, 3, Fraction(11, 2))
    assert e.growth_exponent == 15


def test_string_lookup_and_parity():
    assert catalog("Sphere(3)") == catalog("Sphere", 3)
    rp = catalog("RealProjective", 3)
    assert rp.parity == EVEN_INTEGERS and list(rp.indices(6)) == [0, 2, 4, 6]
    assert catalog("Sphere", 3).parity == ALL_INTEGERS
    with pytest.raises(ParameterError):
        rp.eigenvalue(3)


@pytest.mark.parametrize("bad", [("Torus", 2), ("Sphere", 0), ("ComplexProjective", 1), ("CayleyPlane", 2)])
def test_unknown_or_invalid(bad):
    with pytest.raises(ParameterError):
        catalog(*bad)


@pytest.mark.parametrize("entry", standard_entries(), ids=lambda e: e.name)
def test_identities_exact_up_to_256(entry):
    rep = verify_rho_identity(entry, 256)
    assert rep.max_defect == 0 and rep.max_jacobi_defect == 0 and rep.sandwich_ok


@pytest.mark.parametrize("d", range(1, 9))
def test_identity_holds_across_dimensions(d):
    assert verify_rho_identity(catalog("Sphere", d), 64).ok
    assert verify_rho_identity(catalog("RealProjective", d), 64).ok


def test_corrupted_entry_is_caught():
    good = catalog("Sphere", 4)
    bad = SpaceCatalogEntry(good.name, good.d, good.m, good.rho + 1, good.parity, good.alpha, good.beta, good.dimension)
    with pytest.raises(InvariantViolation):
        verify_rho_identity(bad, 10)
    assert not verify_rho_identity(bad, 10, strict=False).ok


def test_csv_dump():
    lines = catalog_csv().splitlines()
    assert lines[0] == "name,d,m,rho,alpha,beta,parity"
    assert len(lines) == 6
    assert lines[-1].startswith("CayleyPlane,8,3,11/2,7,3,")
