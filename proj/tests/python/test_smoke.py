import math

import pytest

import bytesort


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    assert bytesort.write_synthetic_corpus(root, per_class=24) == 120
    return root


@pytest.fixture(scope="module")
def split(corpus):
    data = bytesort.ingest(corpus)
    return bytesort.select_supervised(bytesort.shuffle_split(data, 42), 40, 1)


def test_histogram():
    h = bytesort.byte_histogram(b"aab")
    assert len(h) == 256
    assert h[ord("a")] == pytest.approx(2 / 3)
    assert math.fsum(h) == pytest.approx(1.0)
    with pytest.raises(bytesort.EmptyFile):
        bytesort.byte_histogram(b"")


def test_parameter_counts():
    c = bytesort.parameter_counts(11)
    assert c["trunk"] == 304779
    assert c["generator"] == 112480
    assert c["total"] == 417271


def test_ingest_and_cache(corpus, tmp_path):
    data = bytesort.ingest(corpus)
    assert len(data) == 120
    assert data.classes == ["bin", "html", "pdf", "txt", "zip"]
    cache = tmp_path / "f.csv"
    bytesort.save_features(data, cache)
    back = bytesort.load_features(cache)
    assert len(back) == len(data)
    assert back.samples[3].source_path == data.samples[3].source_path
    text = cache.read_text().replace(",0.", ",0.9", 1)
    cache.write_text(text)
    with pytest.raises(bytesort.ChecksumError):
        bytesort.load_features(cache)


def test_train_predict_round_trip(split, corpus, tmp_path):
    model, history = bytesort.train_sgan(split, epochs=2, batch=16, seed=3)
    assert model.kind == "classifier"
    assert len(history) == 2
    assert sum(r["best"] for r in history) == 1
    assert history[0]["g_loss"] is not None

    sample = split.test[0]
    label, probs = model.predict(sample.features)
    assert label in split.classes
    assert math.fsum(probs) == pytest.approx(1.0)

    path = tmp_path / "m.bsr"
    model.save(path)
    again = bytesort.load_model(path)
    assert again.predict(sample.features) == (label, probs)
    assert again.classify_file(corpus / sample.source_path)[0] == label

    blob = bytearray(model.to_bytes())
    blob[len(blob) // 2] ^= 1
    with pytest.raises(bytesort.HashMismatch):
        bytesort.model_from_bytes(bytes(blob))


def test_baselines(split):
    acc, counts = bytesort.fit_knn(split, k=1).evaluate(split.test)
    assert 0.0 <= acc <= 1.0
    assert sum(map(sum, counts)) == len(split.test)
    tree = bytesort.fit_tree(split)
    assert tree.kind == "tree"
    mlp, history = bytesort.train_mlp(split, epochs=2, batch=16)
    assert history[0]["g_loss"] is None
    with pytest.raises(ValueError):
        bytesort.fit_knn(split, k=7)
