"""3D UNet mapping multi-coil complex channels to magnitude video."""

from dataclasses import dataclass

import torch
from torch import nn


@dataclass(frozen=True)
class UNetConfig:
    in_channels: int = 20  # 10 coils x (real, imag)
    out_channels: int = 1
    base_width: int = 16
    depth: int = 3


class DoubleConv(nn.Module):
    def __init__(self, c_in, c_out):
        super().__init__()
        self.block = nn.Sequential(
            nn.Conv3d(c_in, c_out, kernel_size=3, padding=1),
            nn.InstanceNorm3d(c_out, affine=True),
            nn.ReLU(inplace=True),
            nn.Conv3d(c_out, c_out, kernel_size=3, padding=1),
            nn.InstanceNorm3d(c_out, affine=True),
            nn.ReLU(inplace=True),
        )

    def forward(self, x):
        return self.block(x)


class UNet3d(nn.Module):
    """Encoder/decoder over (t, y, x) with skip connections and a ReLU head.

    Input and output share their temporal/spatial shape as long as every
    one of (T, H, W) is divisible by 2**depth. The final ReLU keeps the
    magnitude output nonnegative.
    """

    def __init__(self, config=UNetConfig()):
        super().__init__()
        self.config = config
        widths = [config.base_width * 2**i for i in range(config.depth + 1)]
        self.encoders = nn.ModuleList()
        c_prev = config.in_channels
        for w in widths[:-1]:
            self.encoders.append(DoubleConv(c_prev, w))
            c_prev = w
        self.pool = nn.MaxPool3d(2)
        self.bottleneck = DoubleConv(widths[-2], widths[-1])
        self.upsamplers = nn.ModuleList()
        self.decoders = nn.ModuleList()
        for w in reversed(widths[:-1]):
            self.upsamplers.append(
                nn.ConvTranspose3d(2 * w, w, kernel_size=2, stride=2))
            self.decoders.append(DoubleConv(2 * w, w))
        self.head = nn.Conv3d(widths[0], config.out_channels, kernel_size=1)

    def forward(self, x):
        skips = []
        for enc in self.encoders:
            x = enc(x)
            skips.append(x)
            x = self.pool(x)
        x = self.bottleneck(x)
        for up, dec, skip in zip(self.upsamplers, self.decoders,
                                 reversed(skips)):
            x = up(x)
            x = dec(torch.cat([skip, x], dim=1))
        return torch.relu(self.head(x))
