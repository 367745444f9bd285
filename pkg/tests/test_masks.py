import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from maskagree.masks import (
    BinaryMask,
    DatasetError,
    LesionGroup,
    MaskDecodeError,
    MaskDimensionError,
    decode_mask,
    encode_mask,
    ingest_dataset,
    summarize_dataset,
    summary_from_counts,
)
from oracles import png_pixels, raw_png_gray


def _png(arr, mode=None):
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def test_decode_threshold_examples():
    m = decode_mask(raw_png_gray([[255, 255], [0, 0]]))
    assert m.cells.tolist() == [[True, True], [False, False]]
    m = decode_mask(raw_png_gray([[0]]))
    assert m.shape == (1, 1) and m.is_empty()
    # boundary: 127 is background, 128 foreground
    m = decode_mask(raw_png_gray([[127, 128, 200]]))
    assert m.cells.tolist() == [[False, True, True]]


def test_decode_rgb_and_palette():
    rgb = np.zeros((3, 4, 3), dtype=np.uint8)
    rgb[1, 2] = 255
    assert decode_mask(_png(rgb)).cells.nonzero() == (np.array([1]), np.array([2]))

    img = Image.new("P", (4, 3))
    img.putpalette([0, 0, 0, 255, 255, 255] + [0] * 762)
    img.putpixel((0, 0), 1)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    m = decode_mask(buf.getvalue())
    assert m.shape == (3, 4) and m.cells[0, 0] and m.count() == 1


def test_decode_16_bit():
    m = decode_mask(raw_png_gray([[0, 65535, 32896]], bit_depth=16))
    assert m.cells.tolist() == [[False, True, True]]


def test_decode_malformed_names_path():
    with pytest.raises(MaskDecodeError, match="lesion_7.png"):
        decode_mask(b"not a png at all", path="lesion_7.png")
    jpeg = io.BytesIO()
    Image.new("L", (2, 2)).save(jpeg, format="JPEG")
    with pytest.raises(MaskDecodeError):
        decode_mask(jpeg.getvalue())


def test_encode_all_true_is_255():
    data = encode_mask(np.ones((2, 2), dtype=bool))
    assert png_pixels(data).tolist() == [[255, 255], [255, 255]]


def test_encode_decode_encode_idempotent():
    src = raw_png_gray([[0, 255, 255], [255, 0, 0]])
    once = encode_mask(decode_mask(src))
    assert png_pixels(once).tolist() == [[0, 255, 255], [255, 0, 0]]
    assert encode_mask(decode_mask(once)) == once


def test_random_roundtrip_64(rng):
    m = BinaryMask(rng.random((64, 64)) < 0.4)
    assert decode_mask(encode_mask(m)) == m


@settings(max_examples=60, deadline=None)
@given(arrays(np.bool_, st.tuples(st.integers(1, 40), st.integers(1, 40))))
def test_roundtrip_property(cells):
    m = BinaryMask(cells)
    assert decode_mask(encode_mask(m)) == m


def test_binary_mask_is_immutable():
    src = np.zeros((2, 3), dtype=bool)
    m = BinaryMask(src)
    src[0, 0] = True
    assert not m.cells[0, 0]
    with pytest.raises(ValueError):
        m.cells[0, 0] = True
    assert (m.width, m.height) == (3, 2)


@pytest.mark.parametrize("shape", [(0, 3), (3, 0), (4,)])
def test_binary_mask_rejects_bad_shape(shape):
    with pytest.raises(MaskDimensionError):
        BinaryMask(np.zeros(shape, dtype=bool))


def test_lesion_group_invariants():
    with pytest.raises(MaskDimensionError):
        LesionGroup("L", (np.zeros((2, 2)), np.zeros((3, 3))))
    with pytest.raises(DatasetError):
        LesionGroup("", (np.zeros((2, 2)),))


def _write(path, arr):
    path.write_bytes(encode_mask(arr))


def test_ingest_manifest(tmp_path):
    for name in "abc":
        _write(tmp_path / f"{name}.png", np.eye(4, dtype=bool))
    (tmp_path / "list.csv").write_text("lesion_id,mask_path\nL1,a.png\nL1,b.png\nL2,c.png\n")
    groups = ingest_dataset(tmp_path / "list.csv")
    assert [(g.lesion_id, len(g)) for g in groups] == [("L1", 2), ("L2", 1)]


def test_ingest_directory_pattern(tmp_path):
    _write(tmp_path / "ISIC_001_segmentation.png", np.eye(3, dtype=bool))
    _write(tmp_path / "ISIC_001_segmentation_v2.png", np.ones((3, 3), dtype=bool))
    _write(tmp_path / "unrelated.png", np.ones((3, 3), dtype=bool))
    groups = ingest_dataset(tmp_path)
    assert len(groups) == 1
    g = groups[0]
    assert g.lesion_id == "ISIC_001" and len(g) == 2
    assert g.paths[0].endswith("ISIC_001_segmentation.png")


def test_ingest_manifest_takes_precedence(tmp_path):
    _write(tmp_path / "X_segmentation.png", np.eye(3, dtype=bool))
    _write(tmp_path / "m1.png", np.eye(3, dtype=bool))
    (tmp_path / "manifest.csv").write_text("lesion_id,mask_path\nFROM_MANIFEST,m1.png\n")
    assert [g.lesion_id for g in ingest_dataset(tmp_path)] == ["FROM_MANIFEST"]


def test_ingest_rejects_mismatched_group(tmp_path):
    _write(tmp_path / "A_segmentation.png", np.zeros((10, 10), dtype=bool))
    _write(tmp_path / "A_segmentation_2.png", np.zeros((12, 12), dtype=bool))
    _write(tmp_path / "B_segmentation.png", np.zeros((5, 5), dtype=bool))
    rejected = []
    groups = ingest_dataset(tmp_path, on_reject=rejected.append)
    assert [g.lesion_id for g in groups] == ["B"]
    assert len(rejected) == 1 and rejected[0].lesion_id == "A"
    assert "dimension mismatch" in str(rejected[0])
    assert len(rejected[0].paths) == 2


def test_ingest_empty_source_is_fatal(tmp_path):
    with pytest.raises(DatasetError):
        ingest_dataset(tmp_path)
    with pytest.raises(DatasetError):
        ingest_dataset(tmp_path / "missing")


def test_ingest_bad_manifest_header(tmp_path):
    (tmp_path / "m.csv").write_text("id,path\nA,a.png\n")
    with pytest.raises(DatasetError, match="header"):
        ingest_dataset(tmp_path / "m.csv")


def test_ingest_deterministic_and_threaded(tmp_path):
    from synth import write_dataset

    root = write_dataset(tmp_path / "d", 6, masks_per_lesion=[1, 2, 3, 2, 4, 2], seed=3)
    a = ingest_dataset(root, threads=1)
    b = ingest_dataset(root, threads=4)
    assert a == b
    assert [g.lesion_id for g in a] == sorted(g.lesion_id for g in a)
    for g in a:
        assert all(m.shape == g.shape for m in g.masks)
        assert list(g.paths) == sorted(g.paths)


def _groups(sizes):
    return [LesionGroup(f"L{i}", tuple(np.zeros((2, 2)) for _ in range(k))) for i, k in enumerate(sizes)]


def test_summarize_dataset():
    s = summarize_dataset(_groups([2, 2, 5]))
    assert s.counts == {"1": 0, "2": 2, "3": 0, "4+": 1} and s.total == 3
    empty = summarize_dataset([])
    assert empty.total == 0 and set(empty.counts.values()) == {0}


def test_summary_reproduces_archive_table_counts():
    # bucket sizes of the ISIC Archive table: 11546 / 2094 / 100 / 39
    counts = [1] * 11546 + [2] * 2094 + [3] * 100 + [4] * 20 + [5] * 19
    s = summary_from_counts(counts)
    assert s.counts == {"1": 11546, "2": 2094, "3": 100, "4+": 39}
    assert s.total == 13779 == sum(s.counts.values())
    assert s.total - s.counts["1"] == 2233


def test_iter_groups_streams_in_order(tmp_path):
    from maskagree.masks import RejectedGroup, iter_groups
    from synth import write_dataset

    root = write_dataset(tmp_path / "d", 9, masks_per_lesion=[2, 1, 3] * 3, seed=5)
    _write(root / "ZZ_segmentation.png", np.zeros((3, 3), dtype=bool))
    _write(root / "ZZ_segmentation_b.png", np.zeros((4, 3), dtype=bool))
    serial = list(iter_groups(root, func=lambda g: (type(g).__name__, g.lesion_id)))
    threaded = list(iter_groups(root, threads=3, func=lambda g: (type(g).__name__, g.lesion_id)))
    assert serial == threaded
    assert [lid for _, lid in serial] == sorted(lid for _, lid in serial)
    assert serial[-1] == (RejectedGroup.__name__, "ZZ")
