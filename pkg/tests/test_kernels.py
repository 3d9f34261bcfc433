"""Backend equivalence: the compiled kernels and the NumPy fallback must
agree to float precision on identical inputs."""

import numpy as np
import pytest

from spanchain.crf import _pykernels

backends = [("python", _pykernels)]
try:
    from spanchain.crf import _ckernels

    backends.append(("cython", _ckernels))
except ImportError:
    _ckernels = None


def random_instance(rng, t, k):
    scores = np.ascontiguousarray(rng.normal(0, 2, (t, k)))
    trans = np.ascontiguousarray(rng.normal(0, 1, (k, k)))
    start = np.ascontiguousarray(rng.normal(0, 1, k))
    end = np.ascontiguousarray(rng.normal(0, 1, k))
    return scores, trans, start, end


def open_masks(k):
    return (
        np.ones((k, k), dtype=np.uint8),
        np.ones(k, dtype=np.uint8),
        np.ones(k, dtype=np.uint8),
    )


@pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")
def test_backends_agree():
    rng = np.random.default_rng(0)
    for _ in range(50):
        t = int(rng.integers(1, 9))
        k = int(rng.integers(1, 6))
        scores, trans, start, end = random_instance(rng, t, k)
        assert _ckernels.logz(scores, trans, start, end) == pytest.approx(
            _pykernels.logz(scores, trans, start, end), abs=1e-10
        )
        lz_c, un_c, pw_c = _ckernels.posteriors(scores, trans, start, end)
        lz_p, un_p, pw_p = _pykernels.posteriors(scores, trans, start, end)
        assert lz_c == pytest.approx(lz_p, abs=1e-10)
        assert np.asarray(un_c) == pytest.approx(np.asarray(un_p), abs=1e-10)
        assert np.asarray(pw_c) == pytest.approx(np.asarray(pw_p), abs=1e-10)
        allowed, a_start, a_end = open_masks(k)
        # random legality pattern, kept satisfiable by allowing self-loops on tag 0
        allowed &= (rng.random((k, k)) > 0.3).astype(np.uint8)
        allowed[0, 0] = 1
        a_start[:] = (rng.random(k) > 0.3).astype(np.uint8)
        a_start[0] = 1
        a_end[:] = (rng.random(k) > 0.3).astype(np.uint8)
        a_end[0] = 1
        path_c, score_c = _ckernels.viterbi(scores, trans, start, end, allowed, a_start, a_end)
        path_p, score_p = _pykernels.viterbi(scores, trans, start, end, allowed, a_start, a_end)
        assert score_c == pytest.approx(score_p, abs=1e-10)
        assert list(path_c) == list(path_p)


def test_python_fallback_selected_by_env(monkeypatch):
    import importlib

    from spanchain.crf import kernels

    monkeypatch.setenv("SPANCHAIN_KERNELS", "python")
    reloaded = importlib.reload(kernels)
    try:
        assert reloaded.backend() == "python"
        rng = np.random.default_rng(1)
        scores, trans, start, end = random_instance(rng, 4, 3)
        assert np.isfinite(reloaded.logz(scores, trans, start, end))
    finally:
        monkeypatch.delenv("SPANCHAIN_KERNELS")
        importlib.reload(kernels)
