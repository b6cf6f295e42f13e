"""Training and evaluation loop for the artefact-suppression UNet.

CLI: ``fracsynth-train --data DIR --epochs E --seed S [--out DIR]``.
"""

import argparse
import json
import os
from dataclasses import asdict, dataclass

import numpy as np
import torch

from .data import load_dataset
from .ssim import ssim, ssim_loss
from .unet import UNet3d, UNetConfig


class NonFiniteLoss(Exception):
    pass


class MissingCheckpoint(Exception):
    pass


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    learning_rate: float = 1e-4
    batch_size: int = 2
    seed: int = 0
    base_width: int = 16
    depth: int = 3


def _loader(dataset, cfg, shuffle):
    gen = torch.Generator()
    gen.manual_seed(cfg.seed)
    return torch.utils.data.DataLoader(
        dataset, batch_size=cfg.batch_size, shuffle=shuffle, generator=gen,
        num_workers=0)


def train(model, datasets, cfg, out_dir):
    """Minimize 1 - SSIM; returns (checkpoint path, history).

    Determinism is best effort: fixed torch seed, single process, CPU
    kernels. A zero-epoch run saves the untouched initial weights.
    """
    torch.manual_seed(cfg.seed)
    os.makedirs(out_dir, exist_ok=True)
    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    history = {"train_loss": [], "val_loss": []}
    val_loader = _loader(datasets["val"], cfg, shuffle=False)
    for epoch in range(cfg.epochs):
        model.train()
        losses = []
        for inputs, targets in _loader(datasets["train"], cfg, shuffle=True):
            optimizer.zero_grad()
            loss = ssim_loss(model(inputs), targets)
            if not torch.isfinite(loss):
                raise NonFiniteLoss(f"epoch {epoch}: loss {loss.item()}")
            loss.backward()
            optimizer.step()
            losses.append(loss.item())
        history["train_loss"].append(float(np.mean(losses)))
        model.eval()
        with torch.no_grad():
            val_losses = [ssim_loss(model(x), t).item()
                          for x, t in val_loader] or [float("nan")]
        history["val_loss"].append(float(np.mean(val_losses)))
        print(f"epoch {epoch + 1}/{cfg.epochs}: "
              f"train {history['train_loss'][-1]:.4f} "
              f"val {history['val_loss'][-1]:.4f}")
    path = os.path.join(out_dir, "checkpoint.pt")
    torch.save({"model_state": model.state_dict(),
                "unet_config": asdict(model.config),
                "train_config": asdict(cfg),
                "history": history}, path)
    return path, history


def load_checkpoint(path):
    if not os.path.exists(path):
        raise MissingCheckpoint(path)
    payload = torch.load(path, weights_only=True)
    model = UNet3d(UNetConfig(**payload["unet_config"]))
    model.load_state_dict(payload["model_state"])
    model.eval()
    return model, payload


def evaluate_model(checkpoint_path, dataset):
    """Mean/std SSIM of the checkpointed model on a held-out split.

    The report uses the dataset producer's metric-record schema. Evaluation
    runs in double precision and has no stochastic layers, so repeated
    calls give identical numbers.
    """
    model, _ = load_checkpoint(checkpoint_path)
    model.double()
    scores = []
    with torch.no_grad():
        for i in range(len(dataset)):
            inputs, target = dataset[i]
            pred = model(inputs.double()[None])[0]
            scores.append(float(ssim(pred, target.double())))
    model.float()
    return {
        "metric": "ssim",
        "value": float(np.mean(scores)),
        "params": {"std": float(np.std(scores)), "n": len(scores),
                   "per_example": scores},
        "excluded_frames": 0,
    }


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="fracsynth-train",
        description="Train the toy artefact-suppression UNet on a "
                    "fracsynth dataset.")
    parser.add_argument("--data", required=True, help="dataset directory")
    parser.add_argument("--epochs", type=int, default=30)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--batch-size", type=int, default=2)
    parser.add_argument("--base-width", type=int, default=16)
    parser.add_argument("--out", default="runs/latest")
    args = parser.parse_args(argv)

    datasets, manifest = load_dataset(args.data)
    coils = manifest["config"]["compressed_coils"]
    cfg = TrainConfig(epochs=args.epochs, seed=args.seed,
                      batch_size=args.batch_size, base_width=args.base_width)
    torch.manual_seed(cfg.seed)
    model = UNet3d(UNetConfig(in_channels=2 * coils,
                              base_width=cfg.base_width, depth=cfg.depth))
    print(f"training on {len(datasets['train'])} examples "
          f"(val {len(datasets['val'])}, test {len(datasets['test'])})")
    ckpt, history = train(model, datasets, cfg, args.out)
    report = evaluate_model(ckpt, datasets["test"])
    with open(os.path.join(args.out, "metrics.json"), "w") as fh:
        json.dump({"test": report, "history": history}, fh, indent=2)
        fh.write("\n")
    print(f"test SSIM {report['value']:.4f} "
          f"(+/- {report['params']['std']:.4f}) -> {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
