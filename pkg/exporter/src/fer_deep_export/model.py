"""VGG19 feature extraction at a named layer.

The default layer is the activation of the last fully-connected layer
before the classification head ("classifier.4" in torchvision's module
naming, 4096-dim).  Weights come either from the published pretrained
checkpoint (needs network access; ModelUnavailable otherwise) or from a
seeded random initialization for fully offline, deterministic use.
"""

import numpy as np
import torch
from torchvision.models import vgg19

DEFAULT_LAYER = "classifier.4"
INPUT_SIZE = 224
# standard channel statistics the pretrained network was trained with
CHANNEL_MEAN = (0.485, 0.456, 0.406)
CHANNEL_STD = (0.229, 0.224, 0.225)
RANDOM_SEED = 42


class ModelUnavailable(RuntimeError):
    """Pretrained weights could not be obtained."""


class LayerNotFound(KeyError):
    """The requested layer name does not exist in the network."""


def load_model(weights: str = "pretrained"):
    """Build VGG19 in eval mode.  ``weights``: "pretrained" or "random"."""
    if weights == "pretrained":
        try:
            from torchvision.models import VGG19_Weights

            model = vgg19(weights=VGG19_Weights.IMAGENET1K_V1)
        except Exception as err:
            raise ModelUnavailable(
                f"pretrained VGG19 weights unavailable ({err}); "
                "use --weights random for an offline deterministic run"
            ) from err
        tag = "vgg19-imagenet"
    elif weights == "random":
        torch.manual_seed(RANDOM_SEED)
        model = vgg19(weights=None)
        tag = f"vgg19-random-seed{RANDOM_SEED}"
    else:
        raise ValueError(f"unknown weights mode {weights!r}")
    model.eval()
    return model, tag


def resolve_layer(model, layer_name: str):
    modules = dict(model.named_modules())
    if layer_name not in modules:
        candidates = [n for n in modules if n]
        raise LayerNotFound(
            f"layer {layer_name!r} not in model; examples: {candidates[:8]}"
        )
    return modules[layer_name]


def preprocess(batch):
    """(N, H, W) grayscale in [0,1] -> normalized (N, 3, 224, 224)."""
    x = torch.as_tensor(np.asarray(batch), dtype=torch.float32)
    x = x.unsqueeze(1).repeat(1, 3, 1, 1)
    x = torch.nn.functional.interpolate(
        x, size=(INPUT_SIZE, INPUT_SIZE), mode="bilinear", align_corners=False
    )
    mean = torch.tensor(CHANNEL_MEAN).view(1, 3, 1, 1)
    std = torch.tensor(CHANNEL_STD).view(1, 3, 1, 1)
    return (x - mean) / std


@torch.no_grad()
def extract_features(model, layer, batch):
    """Activations of ``layer`` for a grayscale batch, flattened per image."""
    captured = {}

    def hook(_module, _inputs, output):
        captured["value"] = output

    handle = layer.register_forward_hook(hook)
    try:
        model(preprocess(batch))
    finally:
        handle.remove()
    out = captured["value"]
    return out.reshape(out.shape[0], -1).cpu().numpy().astype(np.float32)
