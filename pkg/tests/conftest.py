import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

DATA_DIR = Path(__file__).parent / "data"
PHOTOS_DIR = DATA_DIR / "photos"
FIXTURES_DIR = Path(__file__).parent / "fixtures"


def corpus_paths():
    return sorted(PHOTOS_DIR.glob("*.png"))


def div2k_dir():
    """DIV2K test images (0701.png-0800.png) if the user provided them."""
    env = os.environ.get("DIV2K_DIR")
    candidates = [Path(env)] if env else []
    candidates.append(DATA_DIR / "div2k")
    for d in candidates:
        if d.is_dir() and list(d.glob("*.png")):
            return d
    return None


@pytest.fixture
def photos():
    paths = corpus_paths()
    assert paths, "photo corpus missing; run tests/data/make_corpus.py"
    return paths


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, channels=3, height=24, width=24, bit_depth=8):
    from compacq import Image

    return Image(rng.integers(0, 1 << bit_depth, size=(channels, height, width),
                              dtype=np.uint8), bit_depth)
