"""CLI: export deep features for a FER CSV as an HYF1 file + manifest.

    fer-deep-export export --dataset faces.csv --out feat.hyf \
        [--layer classifier.4] [--weights pretrained|random] \
        [--batch-size 32] [--limit N]

The manifest (<out>.manifest.json) records the model tag, layer, feature
dimension, image count, and preprocessing description.
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .dataset import iter_images
from .hyf import write_hyf1
from .model import (
    CHANNEL_MEAN,
    CHANNEL_STD,
    DEFAULT_LAYER,
    INPUT_SIZE,
    LayerNotFound,
    ModelUnavailable,
    extract_features,
    load_model,
    resolve_layer,
)


def export_embeddings(
    dataset_path,
    out_path,
    layer_name: str = DEFAULT_LAYER,
    weights: str = "pretrained",
    batch_size: int = 32,
    limit: int | None = None,
):
    """Run the network over the dataset; write HYF1 + manifest, return the
    manifest dict."""
    model, model_tag = load_model(weights)
    layer = resolve_layer(model, layer_name)
    ids = []
    chunks = []
    batch_ids = []
    batch_imgs = []

    def flush():
        if not batch_imgs:
            return
        chunks.append(extract_features(model, layer, np.stack(batch_imgs)))
        ids.extend(batch_ids)
        batch_ids.clear()
        batch_imgs.clear()

    for index, img in iter_images(dataset_path, limit=limit):
        batch_ids.append(str(index))
        batch_imgs.append(img)
        if len(batch_imgs) >= batch_size:
            flush()
    flush()
    if chunks:
        vectors = np.concatenate(chunks, axis=0)
    else:
        vectors = np.empty((0, 0), dtype=np.float32)
    write_hyf1(out_path, ids, vectors)
    manifest = {
        "model": model_tag,
        "layer": layer_name,
        "feature_dim": int(vectors.shape[1]),
        "image_count": int(vectors.shape[0]),
        "preprocessing": (
            f"grayscale [0,1] replicated to 3 channels, bilinear resize to "
            f"{INPUT_SIZE}x{INPUT_SIZE}, channel-normalized with mean "
            f"{CHANNEL_MEAN} and std {CHANNEL_STD}"
        ),
        "dataset": str(dataset_path),
    }
    manifest_path = Path(f"{out_path}.manifest.json")
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def build_parser():
    parser = argparse.ArgumentParser(prog="fer-deep-export", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("export", help="export features for a dataset CSV")
    p.add_argument("--dataset", required=True, help="FER CSV file")
    p.add_argument("--out", required=True, help="output HYF1 path")
    p.add_argument("--layer", default=DEFAULT_LAYER, help=f"layer name (default {DEFAULT_LAYER})")
    p.add_argument(
        "--weights",
        default="pretrained",
        choices=("pretrained", "random"),
        help="pretrained checkpoint (needs network) or seeded random init",
    )
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--limit", type=int, default=None, help="export only the first N rows")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        manifest = export_embeddings(
            args.dataset,
            args.out,
            layer_name=args.layer,
            weights=args.weights,
            batch_size=args.batch_size,
            limit=args.limit,
        )
    except (ModelUnavailable, LayerNotFound) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}: {manifest['image_count']} rows x {manifest['feature_dim']}")
    print(f"manifest: {args.out}.manifest.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
