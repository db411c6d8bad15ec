import shutil
from pathlib import Path

import pytest

PHOTOS = Path(__file__).resolve().parents[2] / "tests" / "data" / "photos"

# documented split: the motorcycle stereo pair stays on one side to avoid leakage
TRAIN_IMAGES = ["coffee", "rocket", "china", "flower", "moto_left", "moto_right"]
HOLDOUT_IMAGES = ["astronaut", "chelsea", "ihc", "hubble", "camera",
                  "moon", "page", "clock", "coins", "text"]


def require_primary_cli():
    if shutil.which("compacq") is None:
        pytest.fail("primary CLI 'compacq' not on PATH; install the primary package first")


@pytest.fixture(scope="session")
def photo_dir():
    assert PHOTOS.is_dir(), f"photo corpus missing at {PHOTOS}"
    require_primary_cli()
    return PHOTOS
