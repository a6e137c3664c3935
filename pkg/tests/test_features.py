import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lotus.classifier import featurize, featurize_texts, tokenize
from lotus.classifier._kernels import fnv1a64_many_numba, fnv1a64_many_numpy
from lotus.hashing import fnv1a64, fnv1a64_hex

DIM = 2 ** 18


@pytest.mark.parametrize("text,tokens", [
    ("Dad on the warpath.", ["dad", "on", "the", "warpath"]),
    ("", []),
    ("Re-do RE-DO", ["re", "do", "re", "do"]),
    ("  ...!!  ", []),
    ("I can't", ["i", "can", "t"]),
    ("Café_au lait 2x", ["café", "au", "lait", "2x"]),
])
def test_tokenize(text, tokens):
    assert tokenize(text) == tokens


def test_fnv_published_vectors():
    # test vectors from the FNV reference (FNV-1a, 64 bit)
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8
    assert fnv1a64_hex("a") == "af63dc4c8601ec8c"


def test_featurize_single_unigram():
    fv = featurize(["a"], DIM, 2)
    assert fv.as_dict() == {0xAF63DC4C8601EC8C % DIM: 1}
    assert fv.as_dict() == {126092: 1}


def test_featurize_additive_and_empty():
    assert featurize(["a", "a"], DIM, 1).as_dict() == {126092: 2}
    assert len(featurize([], DIM, 2)) == 0


def test_featurize_bigrams_joined_with_underscore():
    fv = featurize(["dad", "on"], DIM, 2)
    expected = {}
    for gram in ("dad", "on", "dad_on"):
        i = fnv1a64(gram) % DIM
        expected[i] = expected.get(i, 0) + 1
    assert fv.as_dict() == expected


def test_featurize_rejects_tiny_dim():
    with pytest.raises(ValueError):
        featurize(["a"], 1, 1)


words = st.lists(st.sampled_from(["joy", "fear", "dad", "x", "été", "9"]), max_size=12)


@settings(max_examples=100, deadline=None)
@given(words, st.randoms())
def test_unigram_featurization_order_invariant(tokens, rnd):
    shuffled = list(tokens)
    rnd.shuffle(shuffled)
    assert featurize(tokens, 97, 1).as_dict() == featurize(shuffled, 97, 1).as_dict()


@settings(max_examples=50, deadline=None)
@given(st.lists(st.text(max_size=30), max_size=8), st.sampled_from([2, 97, DIM]), st.sampled_from([1, 2]))
def test_batch_featurization_matches_single(texts, dim, ngram_max):
    fm = featurize_texts(texts, dim, ngram_max)
    assert fm.n_rows == len(texts)
    for r, text in enumerate(texts):
        assert fm.row(r).as_dict() == featurize(tokenize(text), dim, ngram_max).as_dict()


def test_batch_truncates_to_max_tokens():
    text = " ".join(f"w{i}" for i in range(600))
    fm = featurize_texts([text], DIM, 1, max_tokens=512)
    assert fm.row(0).as_dict() == featurize(tokenize(text)[:512], DIM, 1).as_dict()
    assert int(fm.counts.sum()) == 512


@settings(max_examples=50, deadline=None)
@given(st.lists(st.binary(max_size=20), max_size=10))
def test_hash_kernels_agree_with_reference(chunks):
    offsets = np.zeros(len(chunks) + 1, dtype=np.int64)
    np.cumsum([len(c) for c in chunks], out=offsets[1:])
    buf = np.frombuffer(b"".join(chunks), dtype=np.uint8) if chunks else np.zeros(0, dtype=np.uint8)
    expected = [fnv1a64(c) for c in chunks]
    assert [int(h) for h in fnv1a64_many_numpy(buf, offsets)] == expected
    assert [int(h) for h in fnv1a64_many_numba(buf, offsets)] == expected
