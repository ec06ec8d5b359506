#!/usr/bin/env python3
"""Writes the toy exported models used by the model-adapter tests.

detector_S.onnx   image [1,1,S,S] -> detections [1,4,6]
                  rows x1 y1 x2 y2 conf cls in model pixels; constant output
segmenter_S.onnx  image [1,1,S,S], box [1,4] -> mask [1,1,S,S]
                  soft indicator of the prompt box

Usage: make_toy_models.py OUT_DIR
"""
import sys
from pathlib import Path

import onnx
import torch
import torch.nn as nn
from onnx import numpy_helper


class Detector(nn.Module):
    def __init__(self, side):
        super().__init__()
        self.pool = nn.AvgPool2d(side // 4)
        self.fc = nn.Linear(16, 4 * 6)
        nn.init.zeros_(self.fc.weight)
        s = float(side)
        rows = [
            [0.25 * s, 0.25 * s, 0.50 * s, 0.50 * s, 0.90, 2.0],
            [0.25 * s, 0.25 * s, 0.45 * s, 0.45 * s, 0.60, 2.0],
            [0.60 * s, 0.10 * s, 0.80 * s, 0.30 * s, 0.75, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        ]
        with torch.no_grad():
            self.fc.bias.copy_(torch.tensor(rows).flatten())

    def forward(self, x):
        return self.fc(self.pool(x).flatten(1)).reshape(1, 4, 6)


class Segmenter(nn.Module):
    # Gather/slice on the box input trips older ONNX importers, so each box
    # edge term is a fixed linear map of the box: xs - x1, x2 - xs, ...
    def __init__(self, side, sharpness=40.0):
        super().__init__()
        centers = torch.arange(side, dtype=torch.float32) + 0.5
        self.side = side
        self.k = sharpness
        self.edges = nn.ModuleList()
        for col, sign in ((0, -1.0), (2, 1.0), (1, -1.0), (3, 1.0)):
            lin = nn.Linear(4, side)
            with torch.no_grad():
                lin.weight.zero_()
                lin.weight[:, col] = sign
                lin.bias.copy_(-sign * centers)
            self.edges.append(lin)
        self.conv = nn.Conv2d(1, 1, 3, padding=1)
        nn.init.zeros_(self.conv.weight)
        nn.init.zeros_(self.conv.bias)

    def forward(self, image, box):
        e = [torch.sigmoid(self.k * lin(box)) for lin in self.edges]
        fx = e[0] * e[1]                     # [1, S]
        fy = e[2] * e[3]                     # [1, S]
        outer = torch.matmul(fy.transpose(0, 1), fx)
        return outer.reshape(1, 1, self.side, self.side) + self.conv(image)


def inline_identity_initializers(path):
    # The exporter shares equal constants through Identity nodes, which older
    # OpenCV importers reject. Give each consumer its own initializer.
    model = onnx.load(path)
    graph = model.graph
    inits = {t.name: t for t in graph.initializer}
    keep = []
    for node in graph.node:
        if node.op_type == "Identity" and node.input[0] in inits:
            copy = numpy_helper.from_array(numpy_helper.to_array(inits[node.input[0]]), node.output[0])
            graph.initializer.append(copy)
        else:
            keep.append(node)
    del graph.node[:]
    graph.node.extend(keep)
    onnx.checker.check_model(model)
    onnx.save(model, path)


def main():
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(0)
    for side in (64, 128):
        torch.onnx.export(Detector(side), torch.zeros(1, 1, side, side), out / f"detector_{side}.onnx",
                          input_names=["image"], output_names=["detections"], dynamo=False)
    torch.onnx.export(Segmenter(64), (torch.zeros(1, 1, 64, 64), torch.zeros(1, 4)), out / "segmenter_64.onnx",
                      input_names=["image", "box"], output_names=["mask"], dynamo=False)
    inline_identity_initializers(out / "segmenter_64.onnx")


if __name__ == "__main__":
    main()
