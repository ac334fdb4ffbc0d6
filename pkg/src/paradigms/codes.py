"""
Code matrices and candidate pools for the presentation paradigms.

A code matrix has one binary codeword per symbol; column j lists the
symbols flashed in trial j of the sequence. Rows must be pairwise distinct
so every symbol is identifiable from a single sequence.
"""

import csv
import io
import logging
from dataclasses import dataclass

import numpy as np

from src.core.exceptions import CodebookError
from src.core.models import Pmf, SequenceSpec, Trial, Vocabulary
from src.query.objective import CandidatePool

logger = logging.getLogger(__name__)

ALP_CODEWORD_LENGTH = 6
ALP_MAX_WEIGHT = 3
RCP_GRID = (4, 7)

Codeword = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class CodeMatrix:
    """Binary (n_symbols, codeword_length) matrix, one row per symbol."""

    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.int8)
        if rows.ndim != 2 or rows.shape[1] == 0:
            raise CodebookError("A code matrix needs at least one column")
        if not np.isin(rows, (0, 1)).all():
            raise CodebookError("Code matrix entries must be 0 or 1")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)

    @property
    def n_symbols(self) -> int:
        return self.rows.shape[0]

    @property
    def codeword_length(self) -> int:
        return self.rows.shape[1]

    def codeword(self, symbol: int) -> Codeword:
        return tuple(int(b) for b in self.rows[symbol])

    def weights(self) -> np.ndarray:
        """Number of trials each symbol appears in."""
        return self.rows.sum(axis=1)

    def duplicate_rows(self) -> list[tuple[int, int]]:
        """Pairs of symbols sharing a codeword."""
        seen: dict[bytes, int] = {}
        pairs = []
        for symbol, row in enumerate(self.rows):
            key = row.tobytes()
            if key in seen:
                pairs.append((seen[key], symbol))
            else:
                seen[key] = symbol
        return pairs

    def is_identifiable(self) -> bool:
        return not self.duplicate_rows()

    def to_sequence(self) -> SequenceSpec:
        """One trial per column, holding the symbols whose codeword has a 1 there."""
        trials = []
        for j in range(self.codeword_length):
            members = np.flatnonzero(self.rows[:, j])
            if members.size == 0:
                raise CodebookError(f"Trial {j} of the code matrix flashes no symbol")
            trials.append(Trial(tuple(int(m) for m in members)))
        return SequenceSpec(tuple(trials))

    @classmethod
    def from_sequence(cls, sequence: SequenceSpec, n_symbols: int) -> "CodeMatrix":
        return cls(sequence.incidence(n_symbols).T)

    def to_csv(self, vocabulary: Vocabulary) -> str:
        """Rows = symbols, columns = trials, entries 0/1."""
        if len(vocabulary) != self.n_symbols:
            raise CodebookError(
                f"Vocabulary has {len(vocabulary)} symbols, matrix has {self.n_symbols} rows"
            )
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["symbol"] + [f"trial_{j + 1}" for j in range(self.codeword_length)])
        for symbol, row in zip(vocabulary.symbols, self.rows):
            writer.writerow([symbol] + [int(b) for b in row])
        return buffer.getvalue()


def rcp_matrix(n_rows: int, n_cols: int, vocabulary: Vocabulary) -> CodeMatrix:
    """
    Row/column paradigm: symbols fill the grid row-major in vocabulary order,
    the symbol at (r, c) flashes with row r and with column c.

    Raises:
        CodebookError: if the grid cannot hold the vocabulary or leaves a
            row or column empty
    """
    if n_rows < 1 or n_cols < 1:
        raise CodebookError(f"Grid dimensions must be positive, got {n_rows}x{n_cols}")
    size = len(vocabulary)
    if n_rows * n_cols < size:
        raise CodebookError(f"A {n_rows}x{n_cols} grid cannot hold {size} symbols")
    if (n_rows - 1) * n_cols >= size or (n_rows == 1 and n_cols > size):
        raise CodebookError(f"A {n_rows}x{n_cols} grid leaves a row or column empty")

    rows = np.zeros((size, n_rows + n_cols), dtype=np.int8)
    for symbol in range(size):
        r, c = divmod(symbol, n_cols)
        rows[symbol, r] = 1
        rows[symbol, n_rows + c] = 1
    return CodeMatrix(rows)


def _codeword_value(word: Codeword) -> int:
    return int("".join(str(b) for b in word), 2)


def alp_codeword_pool(codeword_length: int, max_weight: int) -> list[Codeword]:
    """
    All binary words of the given length with weight 1..max_weight, ordered
    by (weight, numeric value) with the first position most significant.
    """
    if codeword_length < 1:
        raise ValueError(f"codeword_length must be >= 1, got {codeword_length}")
    if not 1 <= max_weight <= codeword_length:
        raise ValueError(f"max_weight must lie in [1, {codeword_length}], got {max_weight}")
    words = []
    for value in range(1, 2**codeword_length):
        word = tuple(int(b) for b in format(value, f"0{codeword_length}b"))
        if sum(word) <= max_weight:
            words.append(word)
    return sorted(words, key=lambda w: (sum(w), _codeword_value(w)))


def alp_pool_from_posterior(
    posterior: Pmf,
    codeword_length: int = ALP_CODEWORD_LENGTH,
    max_weight: int = ALP_MAX_WEIGHT,
) -> tuple[CandidatePool, CodeMatrix]:
    """
    Assign codewords by posterior rank and emit the induced trials.

    Symbols are ranked by descending posterior (lowest index first on ties)
    and take codewords in descending weight, so likelier symbols flash more
    often. The pool holds the codeword_length column trials and selects all
    of them.

    Raises:
        CodebookError: if there are fewer codewords than symbols, or the
            trials it induces coincide
    """
    n = len(posterior)
    pool_words = alp_codeword_pool(codeword_length, max_weight)
    if len(pool_words) < n:
        raise CodebookError(
            f"{len(pool_words)} codewords of length {codeword_length} and weight <= {max_weight} "
            f"cannot cover {n} symbols"
        )
    by_weight = sorted(pool_words, key=lambda w: (-sum(w), _codeword_value(w)))
    ranking = np.lexsort((np.arange(n), -posterior.weights))

    rows = np.zeros((n, codeword_length), dtype=np.int8)
    for rank, symbol in enumerate(ranking):
        rows[symbol] = by_weight[rank]
    matrix = CodeMatrix(rows)
    logger.debug(
        f"ALP codewords: top symbol {int(ranking[0])} weight {int(matrix.weights()[ranking[0]])}"
    )
    sequence = matrix.to_sequence()
    if len(set(sequence.trials)) != len(sequence):
        raise CodebookError("Code matrix produces identical trials")
    pool = CandidatePool(
        candidates=sequence.trials,
        per_symbol_budget=max_weight,
        selection_size=codeword_length,
        n_symbols=n,
    )
    return pool, matrix


def singleton_pool(vocabulary: Vocabulary | int, n_trials: int) -> CandidatePool:
    """Every symbol as its own trial, each symbol at most once per sequence."""
    size = vocabulary if isinstance(vocabulary, int) else len(vocabulary)
    if not 1 <= n_trials <= size:
        raise ValueError(f"n_trials must lie in [1, {size}], got {n_trials}")
    return CandidatePool(
        candidates=tuple(Trial.of(s) for s in range(size)),
        per_symbol_budget=1,
        selection_size=n_trials,
        n_symbols=size,
    )
