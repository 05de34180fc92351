import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from jointparse import tensor as T
from jointparse.gradcheck import check_entrywise, rel_error
from jointparse.oracles import primitive_cases

SEEDS = range(20)


def p(x):
    return T.parameter(np.asarray(x, dtype=np.float64))


# examples -------------------------------------------------------------

def test_matmul_examples():
    np.testing.assert_array_equal(T.matmul(p([[1, 0], [0, 1]]), p([[5, 6], [7, 8]])).data, [[5, 6], [7, 8]])
    np.testing.assert_array_equal(T.matmul(p([[1, 2]]), p([[3], [4]])).data, [[11]])


def test_matmul_shape_error_names_both_shapes():
    with pytest.raises(T.ShapeError, match=r"\(2, 3\).*\(2, 3\)"):
        T.matmul(p(np.zeros((2, 3))), p(np.zeros((2, 3))))


def test_softmax_examples():
    np.testing.assert_allclose(T.softmax(p([0.0, 0.0, 0.0])).data, [1 / 3] * 3)
    out = T.softmax(p([1000.0, 0.0])).data
    assert np.all(np.isfinite(out))
    np.testing.assert_allclose(out, [1.0, 0.0], atol=1e-300)


def test_layer_norm_examples():
    one, zero = p(np.ones(2)), p(np.zeros(2))
    np.testing.assert_array_equal(T.layer_norm(p([4.0, 4.0]), one, zero).data, [0.0, 0.0])
    # var = 1, so the eps correction is 1/sqrt(1 + 1e-5)
    np.testing.assert_allclose(T.layer_norm(p([1.0, 3.0]), one, zero).data, np.array([-1, 1]) / np.sqrt(1 + 1e-5))


def test_backward_examples():
    w = p([1.0, 2.0, 3.0])
    T.sum_(w).backward()
    np.testing.assert_array_equal(w.grad, [1, 1, 1])
    w = p([1.0, 2.0, 3.0])
    T.sum_(w * w).backward()
    np.testing.assert_array_equal(w.grad, [2, 4, 6])


def test_backward_accumulates_until_reset():
    w = p([1.0, 2.0])
    T.sum_(w * 3.0).backward()
    T.sum_(w * 3.0).backward()
    np.testing.assert_array_equal(w.grad, [6, 6])
    w.zero_grad()
    T.sum_(w).backward()
    np.testing.assert_array_equal(w.grad, [1, 1])


def test_backward_rejects_non_scalar():
    with pytest.raises(ValueError, match="scalar"):
        T.backward(p([1.0, 2.0]) * 2.0)


def test_shared_subexpression_visited_once():
    x = p([2.0])
    y = x * x
    T.sum_(y + y).backward()
    np.testing.assert_array_equal(x.grad, [8.0])


def test_gradients_have_parameter_shapes():
    a, b = p(np.ones((3, 4))), p(np.ones((4,)))
    T.sum_(T.relu(a + b)).backward()
    assert a.grad.shape == a.shape and b.grad.shape == b.shape


def test_embedding_gradient_is_sparse():
    w = p(np.arange(12.0).reshape(4, 3))
    T.sum_(T.embedding(w, [[1, 1], [3, 1]])).backward()
    np.testing.assert_array_equal(w.grad, [[0] * 3, [3] * 3, [0] * 3, [1] * 3])


def test_dropout_modes():
    x = p(np.ones((50, 40)))
    assert T.dropout(x, 0.5, None, training=False) is x
    with pytest.raises(ValueError, match="rng"):
        T.dropout(x, 0.5, None, training=True)
    out = T.dropout(x, 0.5, np.random.default_rng(0), training=True).data
    assert set(np.unique(out)) <= {0.0, 2.0}
    again = T.dropout(x, 0.5, np.random.default_rng(0), training=True).data
    np.testing.assert_array_equal(out, again)


def test_forward_is_deterministic():
    rng = np.random.default_rng(3)
    a, b = p(rng.standard_normal((3, 4))), p(rng.standard_normal((4, 2)))
    f = lambda: T.log_softmax(T.tanh(T.matmul(a, b)), -1).data
    np.testing.assert_array_equal(f(), f())


# finite differences ---------------------------------------------------

def test_primitive_case_table_covers_required_ops():
    names = set(primitive_cases(np.random.default_rng(0)))
    for op in ("matmul", "softmax", "layer_norm", "concat_stack", "slice_fancy", "embedding", "exp_log",
               "sum_mean", "transpose_reshape", "relu_tanh_sigmoid", "dropout"):
        assert op in names


@pytest.mark.parametrize("seed", SEEDS)
def test_primitive_gradients_match_finite_differences(seed):
    rng = np.random.default_rng(seed)
    for name, (fn, params) in primitive_cases(rng).items():
        errs = check_entrywise(fn, params)
        assert max(errs) < 1e-6, (name, errs)


def test_gradcheck_detects_a_wrong_backward():
    x = p([0.3, -1.2, 0.8])
    bad = lambda: T._make(np.sin(x.data), (x,), lambda g: (g * np.sin(x.data),))
    assert check_entrywise(lambda: T.sum_(bad()), [x])[0] > 1e-2


def test_rel_error_is_symmetric_and_zero_on_equal():
    assert rel_error(np.ones(3), np.ones(3)) == 0.0
    assert rel_error(np.array([1.0]), np.array([2.0])) == rel_error(np.array([2.0]), np.array([1.0]))


# properties -----------------------------------------------------------

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 9)), elements=finite))
def test_softmax_rows_sum_to_one(x):
    out = T.softmax(T.Tensor(x), -1).data
    assert np.all(out >= 0)
    np.testing.assert_allclose(out.sum(-1), 1.0, atol=1e-9)


@given(arrays(np.float64, st.tuples(st.integers(1, 4), st.integers(1, 9)), elements=finite))
def test_log_softmax_agrees_with_softmax(x):
    ls = T.log_softmax(T.Tensor(x), -1).data
    assert np.all(np.isfinite(ls))
    np.testing.assert_allclose(np.exp(ls), T.softmax(T.Tensor(x), -1).data, atol=1e-12)


# checkpoint format -----------------------------------------------------

@settings(max_examples=50)
@given(st.lists(st.tuples(st.sampled_from(["<f4", "<f8", "<i8", "|u1"]),
                          st.lists(st.integers(0, 4), max_size=3)), max_size=5))
def test_checkpoint_round_trip_is_bit_exact(tmp_path_factory, specs):
    rng = np.random.default_rng(len(specs))
    items = []
    for k, (dt, shape) in enumerate(specs):
        arr = (rng.standard_normal(shape) * 100).astype(dt)
        items.append((f"param/{k}", arr))
    path = tmp_path_factory.mktemp("ck") / "a.bin"
    T.save_arrays(path, items)
    loaded = T.load_arrays(path)
    assert list(loaded) == [n for n, _ in items]
    for name, arr in items:
        assert loaded[name].dtype == arr.dtype and loaded[name].shape == arr.shape
        assert loaded[name].tobytes() == arr.tobytes()
    path2 = path.with_name("b.bin")
    T.save_arrays(path2, loaded.items())
    assert path.read_bytes() == path2.read_bytes()


def test_checkpoint_rejects_bad_magic(tmp_path):
    f = tmp_path / "x.bin"
    f.write_bytes(b"NOPE\x01")
    with pytest.raises(ValueError, match="magic"):
        T.load_arrays(f)


def test_checkpoint_header_layout(tmp_path):
    f = tmp_path / "x.bin"
    T.save_arrays(f, [("w", np.array([1.5], dtype="<f8"))])
    raw = f.read_bytes()
    assert raw[:4] == b"JPTC" and raw[4] == T.VERSION
    assert raw.endswith(np.float64(1.5).tobytes())
