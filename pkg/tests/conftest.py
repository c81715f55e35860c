import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the shared oracles module

from orthoprime.lexicon import TargetLexicon, bundled_lexicon_path, load_lexicon

TESTS_DIR = Path(__file__).parent
RATINGS_CSV = TESTS_DIR / "data" / "synthetic_letter_ratings.csv"


@pytest.fixture(scope="session")
def bundled_lexicon() -> TargetLexicon:
    return load_lexicon(bundled_lexicon_path())


@pytest.fixture(scope="session")
def small_lexicon(bundled_lexicon) -> TargetLexicon:
    """12 bundled targets: divisible by every sub-condition count (2, 3, 4)."""
    return TargetLexicon(targets=bundled_lexicon.targets[:12], source="test-subset")


@pytest.fixture()
def ratings_path() -> Path:
    return RATINGS_CSV
