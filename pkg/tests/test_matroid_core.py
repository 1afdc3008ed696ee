import pytest

from app.api.services.matroid_service import MK4, U24, matroid_service
from app.core.exceptions import InputError, MatroidAxiomError, MatroidFormatError, SizeExceededError
from app.domain.models.canonical import CanonicalKey
from app.domain.models.matroid import Matroid, check_size, direct_sum, free, loops, uniform
from app.infrastructure.formats.matroid_format import (
    dump_matroid,
    load_matroid,
    parse_matroid,
    parse_subset,
)


def test_g841_file_has_expected_shape(g841):
    assert g841.size == 8
    assert g841.rank_of_ground == 4
    # 70 four-sets minus the five circuit-hyperplanes
    assert len(g841.bases) == 65
    assert g841.ground.labels == tuple("12345678")


def test_dual_file_matches_computed_dual(g841, g841_dual):
    assert g841.dual().same_bases(g841_dual)
    assert g841.dual().key == g841_dual.key
    assert g841.dual().dual() is g841


def test_rank_and_closure(mk4):
    triangle = 0b001011  # edges 12, 13, 23
    assert mk4.rank(triangle) == 2
    assert mk4.closure(0b000011) == triangle
    assert mk4.is_flat(triangle)
    assert not mk4.is_flat(0b000011)
    assert mk4.rank(mk4.full) == 3


def test_flats_of_uniform_matroid():
    m = uniform(2, 3)
    # empty set, three points, the whole ground set
    assert len(m.flats()) == 5


def test_contraction_of_two_points_is_uniform(g841):
    x = parse_subset(g841, ["1", "2"])
    minor = g841.contract(x)
    assert minor.size == 6
    assert minor.is_isomorphic(uniform(2, 6))
    assert minor.ground.labels == tuple("345678")


def test_restriction_keeps_labels(g841):
    keep = parse_subset(g841, ["1", "3", "7", "8"])
    r = g841.restrict(keep)
    assert r.ground.labels == ("1", "3", "7", "8")
    assert r.rank_of_ground == 3


def test_canonical_key_is_relabelling_invariant(g841):
    permutation = [3, 7, 0, 5, 1, 6, 2, 4]
    copy = g841.relabel(permutation)
    assert copy.key == g841.key
    assert copy.is_isomorphic(g841)


def test_canonical_key_hex_round_trip(mk4):
    key = mk4.key
    assert CanonicalKey.from_hex(key.hex()) == key
    rebuilt = Matroid.from_key(key)
    assert rebuilt.is_isomorphic(mk4)
    assert key.hex().startswith("0603")


def test_keys_order_by_size_first(u24, mk4):
    assert u24.key < mk4.key


def test_non_isomorphic_matroids_differ(u24):
    assert not u24.is_isomorphic(uniform(1, 4))
    assert not uniform(2, 4).is_isomorphic(direct_sum(uniform(1, 2), uniform(1, 2)))


def test_exchange_axiom_violation_is_reported():
    with pytest.raises(MatroidAxiomError):
        Matroid.from_bases(4, [(0, 1), (2, 3)])


def test_mixed_basis_sizes_rejected():
    with pytest.raises(MatroidAxiomError):
        Matroid.from_bases(3, [(0, 1), (2,)])


def test_named_constructors():
    assert free(3).bases == (0b111,)
    assert loops(2).bases == (0,)
    assert loops(2).loops() == 0b11
    assert free(2).coloops() == 0b11


def test_direct_sum_ranks_add():
    m = direct_sum(uniform(1, 2), uniform(2, 3))
    assert m.size == 5
    assert m.rank_of_ground == 3
    assert len(m.bases) == 2 * 3


def test_minor_search_finds_u24_by_deletion():
    m = uniform(2, 5)
    spec = matroid_service.has_minor_isomorphic_to(m, U24)
    assert spec is not None
    assert spec.contract == 0
    assert bin(spec.delete).count("1") == 1
    assert m.minor(spec).is_isomorphic(U24)


def test_binary_matroid_has_no_u24_minor():
    assert matroid_service.has_minor_isomorphic_to(MK4, U24) is None
    assert matroid_service.has_minor_isomorphic_to(uniform(2, 3), MK4) is None


def test_minor_search_on_matroid_rebuilt_from_key():
    rebuilt = Matroid.from_key(MK4.key)
    assert rebuilt.canonical_labelling() == tuple(range(6))
    spec = matroid_service.has_minor_isomorphic_to(rebuilt, MK4)
    assert spec is not None
    assert spec.contract == 0 and spec.delete == 0
    five = Matroid.from_key(uniform(2, 5).key)
    assert five.minor(matroid_service.has_minor_isomorphic_to(five, U24)).is_isomorphic(U24)


def test_check_size_enforces_cap():
    check_size(12, 12)
    with pytest.raises(SizeExceededError):
        check_size(13, 12)


class TestMatroidFormat:
    def test_bases_form_round_trip(self, mk4):
        text = dump_matroid(mk4)
        parsed = parse_matroid(text)
        assert parsed.same_bases(mk4)
        assert parsed.ground.labels == mk4.ground.labels

    def test_circuits_form(self):
        text = "ELEMENTS 3\nCIRCUITS 2\n0 1\n"
        m = parse_matroid(text)
        assert m.bases == (0b101, 0b110)

    def test_nonbases_form_with_comments(self):
        text = "# U(2,3) minus one basis\nELEMENTS 3\n\nNONBASES 2\n0 1   # parallel pair\n"
        m = parse_matroid(text)
        assert len(m.bases) == 2

    def test_empty_set_basis(self):
        m = parse_matroid("ELEMENTS 2\nBASES\n-\n")
        assert m.rank_of_ground == 0

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "BASES\n0\n",
            "ELEMENTS x\nBASES\n0\n",
            "ELEMENTS 2\nLABELS a a\nBASES\na\n",
            "ELEMENTS 2\nBASES\n0 5\n",
            "ELEMENTS 2\nBASES\n0 0\n",
            "ELEMENTS 2\nNONBASES 1\n0 1\n",
            "ELEMENTS 2\nRANKS\n",
        ],
    )
    def test_malformed_records(self, text):
        with pytest.raises(MatroidFormatError):
            parse_matroid(text)

    def test_format_errors_are_input_errors(self):
        with pytest.raises(InputError):
            parse_matroid("ELEMENTS 1\nBASES\n7\n")

    def test_subset_token_for_ground_set(self, g841):
        assert parse_subset(g841, ["E"]) == g841.full

    def test_unknown_subset_label(self, g841):
        with pytest.raises(InputError):
            parse_subset(g841, ["9"])

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError):
            load_matroid(str(tmp_path / "absent.matroid"))
