"""Tests for KO to KEGG pathway conversion."""

import numpy as np
import pytest

from src.pathwise.exceptions import MappingError
from src.pathwise.kegg.mapping import (
    KoToPathwayMap,
    ko2kegg_abundance,
    ko2kegg_with_report,
    load_ko_map,
)
from src.pathwise.profiles.tables import AbundanceTable, FeatureKind


@pytest.fixture
def small_map() -> KoToPathwayMap:
    return KoToPathwayMap(
        {
            "ko00010": frozenset({"K00001", "K00002"}),
            "ko00020": frozenset({"K00002", "K00004"}),
            "ko00030": frozenset({"K00003"}),
            "ko00040": frozenset({"K09999"}),
        },
        "test map",
    )


def naive_conversion(table: AbundanceTable, ko_map: KoToPathwayMap) -> dict[str, list[float]]:
    result = {}
    for pathway_id in sorted(ko_map.entries):
        totals = [0.0] * table.n_samples
        for ko in sorted(ko_map.entries[pathway_id]):
            if ko in table.feature_ids:
                row = table.feature_ids.index(ko)
                for j in range(table.n_samples):
                    totals[j] += table.values[row, j]
        if any(v > 0 for v in totals):
            result[pathway_id] = totals
    return result


class TestLoadKoMap:
    def test_bundled_map(self):
        ko_map = load_ko_map()
        assert ko_map.pathway_count > 0
        assert "snapshot" in ko_map.provenance
        assert "K00411" in ko_map.members("ko05016")

    def test_custom_map_provenance(self, tmp_path):
        path = tmp_path / "map.tsv"
        path.write_text("# provenance: lab build 7\nko00010\tK00001, K00002\n")
        ko_map = load_ko_map(path)
        assert ko_map.provenance == "lab build 7"
        assert ko_map.members("ko00010") == frozenset({"K00001", "K00002"})

    def test_provenance_defaults_to_file_name(self, tmp_path):
        path = tmp_path / "map.tsv"
        path.write_text("ko00010\tK00001\n")
        assert load_ko_map(path).provenance == "map.tsv"

    @pytest.mark.parametrize(
        "text, message",
        [
            ("ko00010\n", "expected"),
            ("map00010\tK00001\n", "invalid pathway id"),
            ("ko00010\tK00001\nko00010\tK00002\n", "duplicate"),
            ("ko00010\tX1\n", "invalid KO id"),
            ("ko00010\t\n", "no member"),
            ("# only a comment\n", "empty"),
        ],
    )
    def test_malformed(self, tmp_path, text, message):
        path = tmp_path / "map.tsv"
        path.write_text(text)
        with pytest.raises(MappingError, match=message):
            load_ko_map(path)

    def test_missing(self, tmp_path):
        with pytest.raises(MappingError, match="not found"):
            load_ko_map(tmp_path / "nope.tsv")

    def test_invalid_utf8(self, tmp_path):
        path = tmp_path / "map.tsv"
        path.write_bytes(b"ko00010\tK00001\n# snapshot \x80\n")
        with pytest.raises(MappingError, match="byte 0x80 at offset 26"):
            load_ko_map(path)


class TestConversion:
    def test_sums_members_and_drops_zero_rows(self, toy_ko_table, small_map):
        table, report = ko2kegg_with_report(toy_ko_table, small_map)
        assert table.kind == FeatureKind.KEGG_PATHWAY
        # ko00030 only holds the all-zero K00003, ko00040 matches nothing
        assert table.feature_ids == ("ko00010", "ko00020")
        np.testing.assert_array_equal(table.values[0], [11.0, 2.0, 8.0])
        np.testing.assert_array_equal(table.values[1], [5.0, 6.0, 7.0])
        assert report.kept == ["ko00010", "ko00020"]
        matched = {m.pathway_id: (m.matched, m.total) for m in report.matches}
        assert matched["ko00040"] == (0, 1)
        assert matched["ko00010"] == (2, 2)

    def test_report_tsv(self, toy_ko_table, small_map):
        _, report = ko2kegg_with_report(toy_ko_table, small_map)
        lines = report.to_tsv().splitlines()
        assert lines[0] == "pathway\tmatched\ttotal\tkept"
        assert "ko00030\t1\t1\tfalse" in lines
        assert "ko00040" in report.summary()

    def test_matches_naive_double_loop(self):
        rng = np.random.default_rng(99)
        kos = [f"K{i:05d}" for i in range(1, 41)]
        for _ in range(25):
            entries = {
                f"ko{p:05d}": frozenset(rng.choice(kos, size=int(rng.integers(1, 8)), replace=False))
                for p in range(10, 200, 10)
            }
            ko_map = KoToPathwayMap(entries)
            present = sorted(rng.choice(kos, size=25, replace=False))
            values = rng.random((len(present), 4)) * rng.integers(0, 2, size=(len(present), 1))
            table = AbundanceTable(tuple(present), ("a", "b", "c", "d"), values, FeatureKind.KO)
            expected = naive_conversion(table, ko_map)
            if not expected:
                with pytest.raises(MappingError):
                    ko2kegg_abundance(table, ko_map)
                continue
            result = ko2kegg_abundance(table, ko_map)
            assert list(result.feature_ids) == list(expected)
            for i, pathway_id in enumerate(result.feature_ids):
                np.testing.assert_array_equal(result.values[i], expected[pathway_id])

    def test_unknown_kind_is_accepted(self, toy_ko_table, small_map):
        table = ko2kegg_abundance(toy_ko_table.with_kind(FeatureKind.UNKNOWN), small_map)
        assert table.n_features == 2

    def test_wrong_kind(self, toy_ko_table, small_map):
        with pytest.raises(MappingError, match="KO table"):
            ko2kegg_abundance(toy_ko_table.with_kind(FeatureKind.EC), small_map)

    def test_no_overlap(self, small_map):
        table = AbundanceTable(("K77777",), ("S1",), np.array([[3.0]]), FeatureKind.KO)
        with pytest.raises(MappingError, match="non-zero"):
            ko2kegg_abundance(table, small_map)

    def test_mass_bound(self, small_map, toy_ko_table):
        assert small_map.pathways_per_ko()["K00002"] == 2
        assert small_map.max_pathways_per_ko() == 2
        result = ko2kegg_abundance(toy_ko_table, small_map)
        bound = small_map.max_pathways_per_ko() * toy_ko_table.values.sum(axis=0)
        assert np.all(result.values.sum(axis=0) <= bound)


class TestConversionProperties:
    @pytest.fixture
    def random_map(self) -> KoToPathwayMap:
        rng = np.random.default_rng(3)
        kos = [f"K{i:05d}" for i in range(1, 31)]
        return KoToPathwayMap(
            {
                f"ko{p:05d}": frozenset(rng.choice(kos, size=int(rng.integers(1, 7)), replace=False))
                for p in range(10, 130, 10)
            }
        )

    def random_table(self, rng) -> AbundanceTable:
        kos = tuple(f"K{i:05d}" for i in range(1, 31))
        return AbundanceTable(kos, ("S1", "S2", "S3"), rng.random((30, 3)) + 0.1, FeatureKind.KO)

    def test_additive(self, random_map):
        rng = np.random.default_rng(8)
        first, second = self.random_table(rng), self.random_table(rng)
        total = AbundanceTable(first.feature_ids, first.sample_ids, first.values + second.values, FeatureKind.KO)
        a = ko2kegg_abundance(first, random_map)
        b = ko2kegg_abundance(second, random_map)
        combined = ko2kegg_abundance(total, random_map)
        assert combined.feature_ids == a.feature_ids == b.feature_ids
        np.testing.assert_allclose(combined.values, a.values + b.values, rtol=1e-12)

    def test_monotone_in_each_ko(self, random_map):
        rng = np.random.default_rng(9)
        table = self.random_table(rng)
        base = ko2kegg_abundance(table, random_map)
        for row in rng.choice(table.n_features, size=10, replace=False):
            values = np.array(table.values)
            values[row] += rng.random(3) * 5.0
            bumped = ko2kegg_abundance(
                AbundanceTable(table.feature_ids, table.sample_ids, values, FeatureKind.KO), random_map
            )
            assert bumped.feature_ids == base.feature_ids
            assert np.all(bumped.values >= base.values)
            ko = table.feature_ids[row]
            touched = [i for i, p in enumerate(base.feature_ids) if ko in random_map.members(p)]
            untouched = [i for i in range(base.n_features) if i not in touched]
            assert np.all(bumped.values[touched] > base.values[touched])
            np.testing.assert_array_equal(bumped.values[untouched], base.values[untouched])
