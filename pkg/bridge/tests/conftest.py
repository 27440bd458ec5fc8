import pytest
from PIL import Image


@pytest.fixture
def make_png(tmp_path_factory):
    def _make(path, width, height):
        Image.new("RGB", (width, height), (40, 60, 80)).save(path)
        return path

    return _make


@pytest.fixture
def image_dir(tmp_path, make_png):
    """Three synthetic frames with distinct aspect ratios."""
    d = tmp_path / "frames"
    d.mkdir()
    make_png(d / "frame_a.png", 64, 48)
    make_png(d / "frame_b.png", 128, 128)
    make_png(d / "frame_c.png", 160, 320)
    return d
