import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from attnsum.corpus import Vocabulary, build_document, load_corpus
from attnsum.weights import save_weights

from fixture_weights import TINY_CONFIG, make_store, make_tensors

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = DATA_DIR / "goldens"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def tiny_store():
    return make_store()


@pytest.fixture(scope="session")
def tiny_weight_file(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("weights") / "tiny.atnsumw"
    save_weights(TINY_CONFIG, make_tensors(), path)
    return path


@pytest.fixture(scope="session")
def small_vocab() -> Vocabulary:
    return Vocabulary.from_file(DATA_DIR / "vocab_small.txt")


@pytest.fixture(scope="session")
def small_notes():
    return load_corpus(DATA_DIR / "notes_small.jsonl")


@pytest.fixture(scope="session")
def small_docs(small_notes):
    return [build_document(n) for n in small_notes]
