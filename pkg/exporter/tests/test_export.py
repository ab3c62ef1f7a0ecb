"""Exporter contract tests: HYF1 byte layout, lossless round-trip through
the pipeline's loader, bitwise determinism, and error paths.

Tests run in the offline "random" weights mode (seeded, deterministic);
the pretrained path needs network access and only its failure mode is
exercised here.
"""

import struct
from pathlib import Path

import numpy as np
import pytest

from fer_deep_export.cli import export_embeddings, main
from fer_deep_export.model import LayerNotFound, ModelUnavailable, load_model

REPO = Path(__file__).resolve().parents[2]
FIXTURE_CSV = REPO / "fixtures" / "fer_tiny.csv"

pytestmark = pytest.mark.skipif(
    not FIXTURE_CSV.is_file(), reason="bundled fixture dataset not found"
)


@pytest.fixture(scope="module")
def exported(tmp_path_factory):
    out = tmp_path_factory.mktemp("export") / "feat.hyf"
    manifest = export_embeddings(
        FIXTURE_CSV, out, weights="random", batch_size=4, limit=10
    )
    return out, manifest


def test_hyf1_byte_layout(exported):
    out, manifest = exported
    data = out.read_bytes()
    assert data[:4] == b"HYF1"
    (version,) = struct.unpack("<I", data[4:8])
    (n,) = struct.unpack("<Q", data[8:16])
    (dim,) = struct.unpack("<Q", data[16:24])
    assert version == 1
    assert n == 10 == manifest["image_count"]
    assert dim == manifest["feature_dim"] == 4096
    pos = 24
    for i in range(n):
        (id_len,) = struct.unpack("<H", data[pos : pos + 2])
        ident = data[pos + 2 : pos + 2 + id_len].decode()
        assert ident == str(i)  # ids are row indices in file order
        pos += 2 + id_len
    assert len(data) - pos == 4 * n * dim  # exactly the float32 payload


def test_round_trip_through_pipeline_loader(exported):
    ferfuse_fusion = pytest.importorskip("ferfuse.fusion")
    out, manifest = exported
    table = ferfuse_fusion.load_deep_features(out)
    assert table.ids == [str(i) for i in range(10)]
    assert table.dim == manifest["feature_dim"]
    raw = np.frombuffer(out.read_bytes()[-4 * 10 * table.dim :], dtype="<f4")
    assert np.array_equal(table.vectors.ravel(), raw)


def test_repeated_export_bitwise_identical(tmp_path):
    a = tmp_path / "a.hyf"
    b = tmp_path / "b.hyf"
    export_embeddings(FIXTURE_CSV, a, weights="random", limit=3)
    export_embeddings(FIXTURE_CSV, b, weights="random", limit=3)
    assert a.read_bytes() == b.read_bytes()


def test_black_and_white_rows_differ(tmp_path):
    csv = tmp_path / "bw.csv"
    black = " ".join(["0"] * 48 * 48)
    white = " ".join(["255"] * 48 * 48)
    csv.write_text(f"0,{black},Training\n1,{white},PublicTest\n")
    out = tmp_path / "bw.hyf"
    export_embeddings(csv, out, weights="random")
    data = out.read_bytes()
    dim = struct.unpack("<Q", data[16:24])[0]
    payload = np.frombuffer(data[-2 * 4 * dim :], dtype="<f4").reshape(2, dim)
    assert np.linalg.norm(payload[0] - payload[1]) > 0.0


def test_manifest_contents(exported):
    out, manifest = exported
    assert manifest["layer"] == "classifier.4"
    assert manifest["model"].startswith("vgg19-random")
    assert "resize" in manifest["preprocessing"]
    manifest_file = Path(f"{out}.manifest.json")
    assert manifest_file.is_file()


def test_layer_not_found(tmp_path):
    with pytest.raises(LayerNotFound):
        export_embeddings(
            FIXTURE_CSV, tmp_path / "x.hyf", layer_name="no.such.layer", weights="random", limit=1
        )


def test_unknown_weights_mode():
    with pytest.raises(ValueError):
        load_model("bogus")


def test_cli_exit_codes(tmp_path, capsys):
    out = tmp_path / "cli.hyf"
    rc = main(
        [
            "export",
            "--dataset",
            str(FIXTURE_CSV),
            "--out",
            str(out),
            "--weights",
            "random",
            "--limit",
            "2",
        ]
    )
    assert rc == 0
    assert out.is_file()
    rc = main(
        [
            "export",
            "--dataset",
            str(FIXTURE_CSV),
            "--out",
            str(tmp_path / "y.hyf"),
            "--weights",
            "random",
            "--layer",
            "nope",
            "--limit",
            "1",
        ]
    )
    assert rc == 2


def test_alternate_layer_dimension(tmp_path):
    out = tmp_path / "conv.hyf"
    manifest = export_embeddings(
        FIXTURE_CSV, out, layer_name="classifier.1", weights="random", limit=2
    )
    assert manifest["feature_dim"] == 4096
    data = out.read_bytes()
    assert struct.unpack("<Q", data[16:24])[0] == 4096
