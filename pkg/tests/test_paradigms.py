"""Tests for code matrices, pools and experiment arms."""

import numpy as np
import pytest

from src.core.exceptions import CodebookError, ConfigError, InfeasibleQueryError
from src.core.models import Pmf, SequenceSpec, Vocabulary
from src.inference.rbse import QuerySource
from src.paradigms.arms import (
    BASELINE_OF,
    ArmSpec,
    CodebookQuerySource,
    FixedQuerySource,
    GreedyQuerySource,
    Paradigm,
    RandomQuerySource,
    build_query_source,
    validate_arm,
)
from src.paradigms.codes import (
    CodeMatrix,
    alp_codeword_pool,
    alp_pool_from_posterior,
    rcp_matrix,
    singleton_pool,
)


class TestRcpMatrix:
    """Tests for the row/column code matrix."""

    def test_four_by_seven(self, vocab):
        """Test 28 distinct weight-2 codewords of length 11."""
        matrix = rcp_matrix(4, 7, vocab)
        assert matrix.rows.shape == (28, 11)
        assert np.all(matrix.weights() == 2)
        assert matrix.is_identifiable()

    def test_pairwise_overlap_at_most_one(self, vocab):
        rows = rcp_matrix(4, 7, vocab).rows.astype(int)
        overlaps = rows @ rows.T
        off_diagonal = overlaps[~np.eye(28, dtype=bool)]
        assert off_diagonal.max() <= 1

    def test_row_major_layout(self, vocab):
        matrix = rcp_matrix(4, 7, vocab)
        # symbol 8 ("I") sits at row 1, column 1
        assert matrix.codeword(8) == (0, 1, 0, 0, 0, 1, 0, 0, 0, 0, 0)

    def test_grid_too_small(self, vocab):
        with pytest.raises(CodebookError):
            rcp_matrix(3, 7, vocab)

    def test_grid_leaves_row_empty(self, vocab):
        with pytest.raises(CodebookError):
            rcp_matrix(5, 7, vocab)

    def test_sequence_has_one_trial_per_line(self, vocab):
        sequence = rcp_matrix(4, 7, vocab).to_sequence()
        assert len(sequence) == 11
        assert [len(t) for t in sequence] == [7, 7, 7, 7, 4, 4, 4, 4, 4, 4, 4]


class TestAlpCodewords:
    """Tests for the adaptive codeword pool."""

    def test_pool_size(self):
        words = alp_codeword_pool(6, 3)
        assert len(words) == 41
        assert len(set(words)) == 41
        assert all(1 <= sum(w) <= 3 for w in words)

    def test_pool_ordering(self):
        words = alp_codeword_pool(3, 2)
        assert words == [(0, 0, 1), (0, 1, 0), (1, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)]

    @pytest.mark.parametrize("length,weight", [(0, 1), (4, 0), (4, 5)])
    def test_invalid_parameters(self, length, weight):
        with pytest.raises(ValueError):
            alp_codeword_pool(length, weight)

    def test_likely_symbols_get_heavy_codewords(self, vocab):
        """Test that the most probable symbols flash in the most trials."""
        weights = np.full(28, 0.5 / 25)
        weights[[3, 9, 17]] = [0.3, 0.15, 0.05]
        pool, matrix = alp_pool_from_posterior(Pmf(weights))
        assert matrix.is_identifiable()
        assert matrix.weights()[3] == 3
        assert matrix.weights()[9] == 3
        assert matrix.weights().max() <= 3
        assert len(pool) == 6
        assert pool.selection_size == 6

    def test_uniform_posterior_identifiable(self):
        _, matrix = alp_pool_from_posterior(Pmf.uniform(28))
        assert matrix.rows.shape == (28, 6)
        assert matrix.is_identifiable()

    def test_too_few_codewords(self):
        with pytest.raises(CodebookError):
            alp_pool_from_posterior(Pmf.uniform(28), codeword_length=4, max_weight=2)


class TestCodeMatrix:
    def test_csv_header_and_rows(self, vocab):
        text = rcp_matrix(4, 7, vocab).to_csv(vocab)
        lines = text.splitlines()
        assert lines[0] == "symbol," + ",".join(f"trial_{j}" for j in range(1, 12))
        assert lines[1].startswith("A,1,0,0,0,1")
        assert len(lines) == 29
        assert "\r" not in text

    def test_csv_vocabulary_mismatch(self, vocab):
        with pytest.raises(CodebookError):
            CodeMatrix(np.eye(3)).to_csv(vocab)

    def test_duplicate_rows(self):
        matrix = CodeMatrix(np.array([[1, 0], [0, 1], [1, 0]]))
        assert matrix.duplicate_rows() == [(0, 2)]
        assert not matrix.is_identifiable()

    def test_empty_column_rejected(self):
        with pytest.raises(CodebookError):
            CodeMatrix(np.array([[1, 0], [1, 0]])).to_sequence()

    def test_sequence_round_trip(self, vocab):
        matrix = rcp_matrix(4, 7, vocab)
        again = CodeMatrix.from_sequence(matrix.to_sequence(), 28)
        np.testing.assert_array_equal(again.rows, matrix.rows)


class TestSingletonPool:
    def test_every_symbol_once(self, vocab):
        pool = singleton_pool(vocab, 14)
        assert len(pool) == 28
        assert pool.per_symbol_budget == 1
        assert pool.selection_size == 14

    def test_length_bounds(self):
        with pytest.raises(ValueError):
            singleton_pool(5, 6)


class TestArmSpec:
    """Tests for arm definitions."""

    def test_from_dict_defaults(self):
        arm = ArmSpec.from_dict({"name": "a", "paradigm": "alp"})
        assert arm.paradigm is Paradigm.ALP
        assert (arm.codeword_length, arm.max_weight) == (6, 3)
        assert arm.active

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as exc:
            ArmSpec.from_dict({"name": "a", "paradigm": "scp", "colour": "red"})
        assert exc.value.key == "colour"

    def test_missing_paradigm(self):
        with pytest.raises(ConfigError):
            ArmSpec.from_dict({"name": "a"})

    def test_unknown_paradigm(self):
        with pytest.raises(ConfigError):
            ArmSpec(name="a", paradigm="p300")

    def test_dict_round_trip(self):
        arm = ArmSpec(name="m", paradigm=Paradigm.RCP, grid=(4, 7))
        assert ArmSpec.from_dict(arm.to_dict()) == arm

    def test_baselines(self):
        assert BASELINE_OF[Paradigm.ARSVP] is Paradigm.RSVP_RANDOM
        assert all(active.active and not base.active for active, base in BASELINE_OF.items())

    @pytest.mark.parametrize(
        "paradigm,expected",
        [("scp", 28), ("rcp", 11), ("alp", 6), ("arsvp", 14), ("rsvp_random", 14)],
    )
    def test_sequence_length(self, paradigm, expected):
        assert ArmSpec(name="x", paradigm=paradigm).sequence_length(28, 14) == expected


class TestValidateArm:
    def test_standard_arms_pass(self, vocab):
        for paradigm in Paradigm:
            validate_arm(ArmSpec(name=paradigm.value, paradigm=paradigm), vocab, 14)

    def test_singleton_length_too_long(self, vocab):
        with pytest.raises(InfeasibleQueryError):
            validate_arm(ArmSpec(name="a", paradigm="arsvp", trials_per_sequence=40), vocab, 14)

    def test_scp_must_flash_everything(self, vocab):
        with pytest.raises(InfeasibleQueryError):
            validate_arm(ArmSpec(name="s", paradigm="scp", trials_per_sequence=10), vocab, 14)

    def test_bad_grid(self, vocab):
        with pytest.raises(CodebookError):
            validate_arm(ArmSpec(name="r", paradigm="rcp", grid=(2, 2)), vocab, 14)

    def test_small_vocabulary(self):
        small = Vocabulary.from_string("ABC<_")
        validate_arm(ArmSpec(name="r", paradigm="rcp", grid=(2, 3)), small, 3)


class TestBuildQuerySource:
    """Tests for the arm to query source mapping."""

    @pytest.mark.parametrize(
        "paradigm,cls",
        [
            ("arsvp", GreedyQuerySource),
            ("ascp", GreedyQuerySource),
            ("rsvp_random", RandomQuerySource),
            ("scp", FixedQuerySource),
            ("rcp", FixedQuerySource),
            ("alp", CodebookQuerySource),
        ],
    )
    def test_source_types(self, vocab, paradigm, cls):
        arm = ArmSpec(name="x", paradigm=paradigm)
        source = build_query_source(arm, vocab, 1.0, np.random.default_rng(0), 14)
        assert isinstance(source, cls)
        assert isinstance(source, QuerySource)
        sequence = source.next_sequence(Pmf.uniform(28))
        assert isinstance(sequence, SequenceSpec)
        assert len(sequence) == arm.sequence_length(28, 14)

    def test_active_rsvp_flashes_likely_symbols(self, vocab):
        weights = np.full(28, 0.4 / 26)
        weights[[5, 6]] = 0.3
        arm = ArmSpec(name="a", paradigm="arsvp")
        source = build_query_source(arm, vocab, 1.0, np.random.default_rng(1), 14)
        members = {t.members[0] for t in source.next_sequence(Pmf(weights))}
        assert {5, 6} <= members
        assert len(members) == 14

    def test_scp_shuffles_but_keeps_all(self, vocab):
        arm = ArmSpec(name="s", paradigm="scp")
        source = build_query_source(arm, vocab, 1.0, np.random.default_rng(2), 14)
        a = source.next_sequence(Pmf.uniform(28))
        b = source.next_sequence(Pmf.uniform(28))
        assert set(a.trials) == set(b.trials)
        assert len(set(a.trials)) == 28
        assert a != b

    def test_rcp_trials_flash_lines(self, vocab):
        arm = ArmSpec(name="r", paradigm="rcp")
        source = build_query_source(arm, vocab, 1.0, np.random.default_rng(3), 14)
        sizes = sorted(len(t) for t in source.next_sequence(Pmf.uniform(28)))
        assert sizes == [4] * 7 + [7] * 4

    def test_rsvp_random_differs_across_draws(self, vocab):
        arm = ArmSpec(name="r", paradigm="rsvp_random")
        source = build_query_source(arm, vocab, 1.0, np.random.default_rng(4), 14)
        draws = {frozenset(source.next_sequence(Pmf.uniform(28)).trials) for _ in range(5)}
        assert len(draws) > 1

