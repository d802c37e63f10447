import struct

import numpy as np
import pytest

from swarmlab.errors import IdxFormatError, IdxTruncationError, InputFormatError, InvalidArgumentError
from swarmlab.idx import (
    IMAGES_MAGIC,
    encode_idx_images,
    filter_by_label,
    load_idx_images,
    load_idx_labels,
    write_idx_images,
    write_idx_labels,
)


@pytest.fixture()
def images(rng):
    return rng.integers(0, 256, size=(3, 28, 28), dtype=np.uint8)


def test_images_file_layout(tmp_path, images):
    path = write_idx_images(tmp_path / "imgs.idx", images)
    data = path.read_bytes()
    assert data[:16] == bytes.fromhex("00000803" "00000003" "0000001c" "0000001c")
    assert len(data) == 16 + 3 * 784
    assert data[16:16 + 784] == images[0].tobytes()


def test_images_load_back(tmp_path, images):
    path = write_idx_images(tmp_path / "imgs.idx", images.reshape(3, 784))
    loaded = load_idx_images(path)
    assert loaded.dtype == np.uint8
    assert loaded.shape == (3, 28, 28)
    assert np.array_equal(loaded, images)
    loaded[0, 0, 0] ^= 1  # writable copy


def test_labels_load_back(tmp_path):
    path = write_idx_labels(tmp_path / "labels.idx", [7, 2, 1, 0])
    assert path.read_bytes()[:8] == bytes.fromhex("00000801" "00000004")
    assert load_idx_labels(path).tolist() == [7, 2, 1, 0]


def test_wrong_magic(tmp_path, images):
    path = tmp_path / "bad.idx"
    path.write_bytes(struct.pack(">I", 0x0801) + encode_idx_images(images)[4:])
    with pytest.raises(IdxFormatError) as exc_info:
        load_idx_images(path)
    assert exc_info.value.offset == 0
    assert exc_info.value.exit_code == 3


def test_labels_reject_image_magic(tmp_path, images):
    path = write_idx_images(tmp_path / "imgs.idx", images)
    with pytest.raises(IdxFormatError):
        load_idx_labels(path)


def test_wrong_dimensions(tmp_path):
    path = tmp_path / "small.idx"
    path.write_bytes(struct.pack(">IIII", IMAGES_MAGIC, 1, 27, 27) + bytes(27 * 27))
    with pytest.raises(IdxFormatError) as exc_info:
        load_idx_images(path)
    assert exc_info.value.offset == 8


def test_truncated_payload(tmp_path, images):
    path = tmp_path / "short.idx"
    path.write_bytes(encode_idx_images(images)[:-1])
    with pytest.raises(IdxTruncationError) as exc_info:
        load_idx_images(path)
    assert isinstance(exc_info.value, InputFormatError)


def test_truncated_header(tmp_path):
    path = tmp_path / "tiny.idx"
    path.write_bytes(b"\x00\x00\x08")
    with pytest.raises(IdxTruncationError):
        load_idx_images(path)


def test_short_label_file_read_as_images_is_format_error(tmp_path):
    path = write_idx_labels(tmp_path / "labels.idx", [3, 1, 4])
    assert len(path.read_bytes()) < 16
    with pytest.raises(IdxFormatError) as exc_info:
        load_idx_images(path)
    assert exc_info.value.offset == 0


def test_image_magic_with_cut_header_is_truncation(tmp_path):
    path = tmp_path / "cut.idx"
    path.write_bytes(struct.pack(">II", IMAGES_MAGIC, 5))
    with pytest.raises(IdxTruncationError) as exc_info:
        load_idx_images(path)
    assert exc_info.value.offset == 8


def test_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "long.idx"
    path.write_bytes(struct.pack(">II", 0x0801, 2) + bytes([1, 2, 3]))
    with pytest.raises(IdxTruncationError):
        load_idx_labels(path)


def test_missing_file(tmp_path):
    with pytest.raises(IdxFormatError):
        load_idx_images(tmp_path / "nope.idx")


def test_encode_rejects_bad_shapes():
    with pytest.raises(InvalidArgumentError):
        encode_idx_images(np.zeros((2, 10, 10)))
    with pytest.raises(InvalidArgumentError):
        encode_idx_images(np.full((1, 784), 300))


def test_filter_by_label(images):
    kept = filter_by_label(images, np.array([1, 0, 1]), 1)
    assert np.array_equal(kept, images[[0, 2]])
    assert len(filter_by_label(images, np.array([1, 0, 1]), 5)) == 0
    with pytest.raises(InvalidArgumentError):
        filter_by_label(images, np.array([1]), 1)
