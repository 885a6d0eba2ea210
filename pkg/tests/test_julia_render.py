import io

import numpy as np
import pytest
from PIL import Image

from merodyn import (
    ConfigError,
    Mode,
    Palette,
    PixelState,
    RasterImage,
    RenderConfig,
    Window,
    classify_pixel,
    encode_ppm,
    render,
)
from merodyn.julia_render import capture_regions, read_outcomes_csv, write_outcomes_csv


def small(lam, **kw):
    kw.setdefault("width", 64)
    kw.setdefault("height", 48)
    return RenderConfig(lam, **kw)


@pytest.mark.parametrize("kw", [
    {"window": Window(1.0, -1.0, -1.0, 1.0)},
    {"window": Window(-1.0, 1.0, 0.0, 0.0)},
    {"width": 0},
    {"max_iter": 0},
    {"escape_bound": -1.0},
    {"conv_eps": 0.0},
])
def test_config_validation(kw):
    with pytest.raises(ConfigError):
        render(small(1.1, **kw))


def test_lambda_validation():
    with pytest.raises(ConfigError):
        RenderConfig(-2.0).validate()


def test_pixel_centers_symmetric():
    cfg = small(1.1)
    for r in range(cfg.height):
        a, b = cfg.pixel_center(r, 3), cfg.pixel_center(cfg.height - 1 - r, 3)
        assert a.imag == -b.imag and a.real == b.real
    assert cfg.pixel_center(0, 0) == complex(-1 + 1 / 64, 1 - 1 / 48)


@pytest.mark.parametrize("lam", [0.9, 1.1, 12.0])
def test_render_symmetric_and_worker_independent(lam):
    cfg = small(lam, height=50)
    ref = render(cfg, workers=1)
    assert np.array_equal(ref.state, ref.state[::-1])
    assert np.array_equal(ref.iterations, ref.iterations[::-1])
    for w in (2, 3, 8):
        assert render(cfg, workers=w) == ref


def test_render_matches_classify_pixel():
    cfg = small(0.9, width=9, height=7)
    img = render(cfg, workers=2)
    for r in range(cfg.height):
        for c in range(cfg.width):
            assert img.outcome(r, c) == classify_pixel(cfg, cfg.pixel_center(r, c))


def test_escape_only_subset_of_aware():
    for lam in (0.9, 1.1):
        esc = render(small(lam, mode=Mode.ESCAPE_ONLY))
        aware = render(small(lam))
        assert not np.any(esc.fatou_mask() & ~aware.fatou_mask())
        assert set(np.unique(aware.state)) <= {PixelState.FATOU, PixelState.JULIA}


def test_escape_only_keeps_undecided():
    img = render(small(0.9, mode=Mode.ESCAPE_ONLY))
    assert np.any(img.state == PixelState.UNDECIDED)


def test_pole_and_escape():
    cfg = RenderConfig(1.1, width=4, height=4)
    assert classify_pixel(cfg, -1.0).state is PixelState.JULIA
    # left half plane far out: exp(-z) blows up in one step
    out = classify_pixel(cfg, complex(-30.0, 0.5))
    assert out == classify_pixel(cfg, complex(-30.0, 0.5))
    assert out.state is PixelState.FATOU and out.iterations == 1


def test_capture_regions():
    cap = capture_regions(RenderConfig(12.0))
    assert len(cap.centers) == 2
    assert cap.wedge_radius == 0.0
    mid = capture_regions(RenderConfig(1.1))
    assert mid.wedge_radius > 0.0 and len(mid.centers) == 1
    assert len(capture_regions(RenderConfig(1.1, mode=Mode.ESCAPE_ONLY)).centers) == 0


def _tiny():
    state = np.array([[PixelState.FATOU, PixelState.JULIA]], dtype=np.uint8)
    iters = np.array([[3, 10]], dtype=np.int32)
    return RasterImage(2, 1, 10, state, iters)


def test_ppm_bytes():
    data = encode_ppm(_tiny())
    assert data == b"P6\n2 1\n255\n" + bytes([255, 0, 0, 255, 255, 255])
    shaded = encode_ppm(_tiny(), Palette.ITERATION_SHADED, comment="hi")
    assert shaded.startswith(b"P6\n# hi\n2 1\n255\n")
    assert shaded[-6:-3] == bytes([255 - 191 * 3 // 10, 0, 0])


def test_ppm_readable_by_pillow():
    img = render(small(1.1, width=20, height=10))
    pil = Image.open(io.BytesIO(encode_ppm(img, comment="merodyn test")))
    assert pil.size == (20, 10) and pil.mode == "RGB"
    arr = np.asarray(pil)
    assert np.array_equal(arr[..., 1] == 0, img.fatou_mask())
    tiny = np.asarray(Image.open(io.BytesIO(encode_ppm(_tiny()))))
    assert tiny.tolist() == [[[255, 0, 0], [255, 255, 255]]]


def test_outcomes_csv_round_trip():
    img = render(small(0.9, width=10, height=6, mode=Mode.ESCAPE_ONLY))
    buf = io.StringIO()
    write_outcomes_csv(img, buf)
    assert buf.getvalue().splitlines()[0] == "row,col,state,iterations"
    back = read_outcomes_csv(io.StringIO(buf.getvalue()), img.max_iter)
    assert back == img
