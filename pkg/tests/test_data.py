import gzip
import struct

import numpy as np
import pytest
from scipy import stats

from ddlab.data import (
    Dataset,
    LabelNoiseSpec,
    PoolSource,
    SyntheticSource,
    Teacher,
    apply_label_noise,
    fashion_mnist_paths,
    load_fashion_mnist,
    load_idx,
    make_synthetic,
    make_teacher,
    normalize,
    one_hot,
    parse_idx,
    save_idx,
    subsample,
    train_test_split,
)
from ddlab.exceptions import FormatError, InputError


def idx_bytes(array, type_byte=0x08):
    array = np.asarray(array)
    return bytes([0, 0, type_byte, array.ndim]) + struct.pack(f">{array.ndim}I", *array.shape) + array.tobytes()


@pytest.fixture
def synthetic():
    return SyntheticSource(8, 5, 20, teacher_seed=3).sample(400, seed=1)


class TestIdx:
    def test_hand_built_2x2(self):
        buf = bytes([0, 0, 0x08, 2, 0, 0, 0, 2, 0, 0, 0, 2, 1, 2, 3, 255])
        out = parse_idx(buf)
        assert out.shape == (2, 2)
        np.testing.assert_array_equal(out, [[1, 2], [3, 255]])

    def test_file_round_trip(self, tmp_path):
        arr = np.arange(24, dtype=np.uint8).reshape(2, 3, 4)
        save_idx(tmp_path / "a.idx", arr)
        out = load_idx(tmp_path / "a.idx")
        assert out.dtype == np.uint8
        np.testing.assert_array_equal(out, arr)

    def test_gzip(self, tmp_path):
        arr = np.arange(6, dtype=np.uint8).reshape(3, 2)
        (tmp_path / "a.gz").write_bytes(gzip.compress(idx_bytes(arr)))
        np.testing.assert_array_equal(load_idx(tmp_path / "a.gz"), arr)

    def test_other_types_are_big_endian(self):
        arr = np.array([-2, 300, 70000], dtype=">i4")
        out = parse_idx(idx_bytes(arr, 0x0C))
        np.testing.assert_array_equal(out, [-2, 300, 70000])
        arr = np.array([-5, 7], dtype=">i2")
        np.testing.assert_array_equal(parse_idx(idx_bytes(arr, 0x0B)), [-5, 7])

    def test_truncated_by_one_byte(self):
        buf = idx_bytes(np.zeros((2, 2), dtype=np.uint8))[:-1]
        with pytest.raises(FormatError) as exc:
            parse_idx(buf)
        assert exc.value.offset == len(buf)
        assert f"offset {len(buf)}" in str(exc.value)

    @pytest.mark.parametrize("pos,value", [(0, 1), (1, 8)])
    def test_bad_magic(self, pos, value):
        buf = bytearray(idx_bytes(np.zeros(3, dtype=np.uint8)))
        buf[pos] = value
        with pytest.raises(FormatError) as exc:
            parse_idx(bytes(buf))
        assert exc.value.offset == pos

    def test_unsupported_type(self):
        buf = bytearray(idx_bytes(np.zeros(3, dtype=np.uint8)))
        buf[2] = 0x0D  # float32 is not accepted
        with pytest.raises(FormatError) as exc:
            parse_idx(bytes(buf))
        assert exc.value.offset == 2

    def test_zero_dimensions(self):
        with pytest.raises(FormatError) as exc:
            parse_idx(bytes([0, 0, 8, 0]))
        assert exc.value.offset == 3

    def test_truncated_header(self):
        with pytest.raises(FormatError) as exc:
            parse_idx(bytes([0, 0, 8, 3, 0, 0, 0, 1]))
        assert exc.value.offset == 8
        with pytest.raises(FormatError):
            parse_idx(b"\x00\x00")

    def test_trailing_bytes(self):
        buf = idx_bytes(np.zeros((2, 2), dtype=np.uint8)) + b"\x00\x01"
        with pytest.raises(FormatError) as exc:
            parse_idx(buf)
        assert exc.value.offset == 12 + 4

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_idx(tmp_path / "nope")


def write_fake_fashion(root, n_train=30, n_test=10, gz=False):
    rng = np.random.default_rng(0)
    files = {
        "train-images-idx3-ubyte": rng.integers(0, 256, (n_train, 28, 28), dtype=np.uint8),
        "train-labels-idx1-ubyte": rng.integers(0, 10, n_train, dtype=np.uint8),
        "t10k-images-idx3-ubyte": rng.integers(0, 256, (n_test, 28, 28), dtype=np.uint8),
        "t10k-labels-idx1-ubyte": rng.integers(0, 10, n_test, dtype=np.uint8),
    }
    for name, arr in files.items():
        data = idx_bytes(arr)
        if gz:
            (root / (name + ".gz")).write_bytes(gzip.compress(data))
        else:
            (root / name).write_bytes(data)
    return files


class TestFashionMnist:
    @pytest.mark.parametrize("gz", [False, True])
    def test_load_layout(self, tmp_path, gz):
        files = write_fake_fashion(tmp_path, gz=gz)
        train, test = load_fashion_mnist(tmp_path)
        assert train.inputs.shape == (30, 784) and test.inputs.shape == (10, 784)
        np.testing.assert_allclose(train.inputs, files["train-images-idx3-ubyte"].reshape(30, -1) / 255.0)
        np.testing.assert_array_equal(test.labels, files["t10k-labels-idx1-ubyte"])
        assert train.num_classes == 10 and train.noise_p == 0

    def test_missing_file_names_path(self, tmp_path):
        write_fake_fashion(tmp_path)
        (tmp_path / "t10k-labels-idx1-ubyte").unlink()
        with pytest.raises(FileNotFoundError, match="t10k-labels-idx1-ubyte"):
            fashion_mnist_paths(tmp_path)

    def test_inconsistent_counts(self, tmp_path):
        write_fake_fashion(tmp_path)
        (tmp_path / "train-labels-idx1-ubyte").write_bytes(idx_bytes(np.zeros(29, dtype=np.uint8)))
        with pytest.raises(FormatError):
            load_fashion_mnist(tmp_path)

    def test_pool_source(self, tmp_path):
        write_fake_fashion(tmp_path)
        train, _ = load_fashion_mnist(tmp_path)
        src = PoolSource(train)
        assert src.capacity == 30
        assert src.sample(10, 1).n == 10
        with pytest.raises(InputError):
            src.sample(31, 1)


class TestSynthetic:
    def test_deterministic(self):
        teacher = make_teacher(5, 3, 10, seed=2)
        assert make_synthetic(5, 50, 3, teacher, 9) == make_synthetic(5, 50, 3, teacher, 9)
        assert make_synthetic(5, 50, 3, teacher, 9) != make_synthetic(5, 50, 3, teacher, 10)

    def test_single_class_rejected(self):
        teacher = make_teacher(5, 1, 10)
        with pytest.raises(InputError):
            make_synthetic(5, 10, 1, teacher, 0)

    def test_inconsistent_teacher(self):
        teacher = make_teacher(5, 3, 10)
        with pytest.raises(InputError):
            make_synthetic(6, 10, 3, teacher, 0)
        with pytest.raises(InputError):
            make_synthetic(5, 10, 4, teacher, 0)

    def test_labels_follow_teacher(self):
        teacher = make_teacher(4, 3, 12, seed=5)
        ds = make_synthetic(4, 30, 3, teacher, 0)
        np.testing.assert_array_equal(ds.labels, np.argmax(teacher.scores(ds.inputs), axis=1))
        assert ds.inputs.shape == (30, 4)

    def test_class_frequencies_not_degenerate(self):
        src = SyntheticSource(20, 10, 50, teacher_seed=0)
        freq = np.bincount(src.sample(5000, 0).labels, minlength=10) / 5000
        assert np.all((freq >= 0.03) & (freq <= 0.4)), freq

    def test_inputs_standard_gaussian(self):
        ds = SyntheticSource(10, 3, 10).sample(20000, 4)
        assert abs(ds.inputs.mean()) < 0.01
        assert abs(ds.inputs.var() - 1) < 0.01

    def test_prefix_stable(self):
        src = SyntheticSource(4, 3, 8)
        a, b = src.sample(10, 7), src.sample(25, 7)
        np.testing.assert_array_equal(a.inputs, b.inputs[:10])


class TestLabelNoise:
    def test_zero_p(self, synthetic):
        noisy = apply_label_noise(synthetic, LabelNoiseSpec(0.0, 1))
        np.testing.assert_array_equal(noisy.labels, synthetic.clean_labels)

    def test_one_p(self, synthetic):
        noisy = apply_label_noise(synthetic, LabelNoiseSpec(1.0, 1))
        assert np.all(noisy.labels != noisy.clean_labels)

    def test_statistics(self):
        clean = np.random.default_rng(0).integers(0, 10, 10000)
        ds = Dataset(np.zeros((10000, 1)), clean, clean.copy(), 10)
        noisy = apply_label_noise(ds, LabelNoiseSpec(0.2, 42))
        flipped = noisy.labels != clean
        assert abs(flipped.mean() - 0.2) <= 0.015
        shift = (noisy.labels[flipped] - clean[flipped]) % 10
        counts = np.bincount(shift, minlength=10)[1:]
        assert stats.chisquare(counts).pvalue > 0.01

    def test_provenance_and_immutability(self, synthetic):
        noisy = apply_label_noise(synthetic, LabelNoiseSpec(0.3, 5))
        np.testing.assert_array_equal(noisy.clean_labels, synthetic.clean_labels)
        assert noisy.noise_p == 0.3 and noisy.seeds[1] == 5
        sub = subsample(noisy, 100, 2)
        np.testing.assert_array_equal(sub.flipped, sub.labels != sub.clean_labels)
        with pytest.raises(ValueError):
            noisy.labels[0] = 0

    def test_drawn_once_and_nested_in_p(self, synthetic):
        lo = apply_label_noise(synthetic, LabelNoiseSpec(0.1, 8))
        hi = apply_label_noise(synthetic, LabelNoiseSpec(0.4, 8))
        assert lo == apply_label_noise(synthetic, LabelNoiseSpec(0.1, 8))
        assert np.all(hi.flipped[lo.flipped])
        # a sample flipped at both levels gets the same wrong class
        both = lo.flipped & hi.flipped
        np.testing.assert_array_equal(lo.labels[both], hi.labels[both])

    def test_needs_two_classes(self):
        ds = Dataset(np.zeros((3, 1)), np.zeros(3, int), np.zeros(3, int), 1)
        with pytest.raises(InputError):
            apply_label_noise(ds, LabelNoiseSpec(0.1))

    @pytest.mark.parametrize("p", [-0.1, 1.1, float("nan")])
    def test_bad_p(self, p):
        with pytest.raises(InputError):
            LabelNoiseSpec(p)


class TestTransforms:
    def test_one_hot(self):
        np.testing.assert_array_equal(one_hot([0, 2], 3), [[1, 0, 0], [0, 0, 1]])
        with pytest.raises(InputError):
            one_hot([3], 3)
        labels = np.random.default_rng(0).integers(0, 7, 50)
        np.testing.assert_array_equal(np.argmax(one_hot(labels, 7), axis=1), labels)

    def test_subsample_full_is_permutation(self, synthetic):
        sub = subsample(synthetic, synthetic.n, 3)
        assert sorted(map(tuple, sub.inputs)) == sorted(map(tuple, synthetic.inputs))

    def test_subsample_nested(self):
        ds = SyntheticSource(3, 2, 5).sample(1000, 0)
        small, big = subsample(ds, 100, 11), subsample(ds, 500, 11)
        assert {tuple(r) for r in small.inputs} <= {tuple(r) for r in big.inputs}
        assert subsample(ds, 100, 11) == small

    def test_subsample_too_large(self, synthetic):
        with pytest.raises(InputError):
            subsample(synthetic, synthetic.n + 1, 0)

    def test_normalize(self):
        out = normalize(np.array([[0, 255, 128]], dtype=np.uint8))
        assert out[0, 0] == 0 and out[0, 1] == 1
        assert abs(out[0, 2] - 128 / 255) <= 1e-12
        real = np.array([[0.5, -2.0]])
        np.testing.assert_array_equal(normalize(real), real)

    def test_train_test_split(self, synthetic):
        tr, te = train_test_split(synthetic, 100, 0)
        assert tr.n == 300 and te.n == 100
        with pytest.raises(InputError):
            train_test_split(synthetic, 400, 0)


class TestDataset:
    def test_invariants(self):
        with pytest.raises(InputError):
            Dataset(np.zeros((2, 1)), np.array([0, 5]), np.array([0, 5]), 3)
        with pytest.raises(InputError):
            Dataset(np.zeros((2, 1)), np.array([0, 1]), np.array([0]), 3)

    def test_targets(self, synthetic):
        assert synthetic.targets().shape == (400, 5)
        np.testing.assert_array_equal(np.argmax(synthetic.targets(), axis=1), synthetic.labels)

    def test_noise_free_dataset_must_match_clean(self):
        with pytest.raises(InputError):
            Dataset(np.zeros((2, 1)), np.array([0, 1]), np.array([0, 0]), 2)

    def test_caller_arrays_stay_writable(self):
        X = np.zeros((2, 1))
        Dataset(X, np.array([0, 1]), np.array([0, 1]), 2)
        X[0, 0] = 1.0
