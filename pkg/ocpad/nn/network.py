"""
Sequential layer chains: shape inference, parameter storage, forward and
backward passes.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ocpad.errors import ContractViolation
from ocpad.nn import layers
from ocpad.schemas.layer import LayerSpec
from ocpad.utils.seeding import rng_for

logger = logging.getLogger(__name__)

Shape = Tuple[int, ...]
Params = List[Dict[str, np.ndarray]]


def ceil_half(n: int) -> int:
    return -(-n // 2)


def output_shape(spec: LayerSpec, shape: Shape, index: int) -> Shape:
    """
    Shape (without batch) a layer produces from ``shape``.
    """
    kind = spec.kind
    if kind in ("relu", "sigmoid"):
        return shape
    if kind == "dense":
        if len(shape) != 1:
            raise ContractViolation(f"dense needs a flat input, got {shape}", index)
        return (spec.units,)
    if kind == "reshape":
        if len(shape) != 1 or shape[0] != int(np.prod(spec.shape)):
            raise ContractViolation(f"cannot reshape {shape} to {tuple(spec.shape)}", index)
        return tuple(spec.shape)

    if len(shape) != 3:
        raise ContractViolation(f"{kind} needs a (C, H, W) input, got {shape}", index)
    channels, height, width = shape
    if kind == "conv":
        return (spec.out_channels, -(-height // spec.stride), -(-width // spec.stride))
    if kind == "maxpool":
        return (channels, ceil_half(height), ceil_half(width))
    if kind == "upsample":
        return (channels, 2 * height, 2 * width)
    if kind == "flatten":
        return (channels * height * width,)
    if kind == "crop":
        c, h, w = spec.shape
        if c != channels or h > height or w > width:
            raise ContractViolation(f"cannot crop {shape} to {tuple(spec.shape)}", index)
        return (c, h, w)
    raise ContractViolation(f"unknown layer kind {kind!r}", index)


def infer_shapes(specs: Sequence[LayerSpec], input_shape: Shape) -> List[Shape]:
    """
    Shapes along the chain: entry 0 is the input, entry i+1 is layer i's output.
    """
    shapes = [tuple(int(d) for d in input_shape)]
    if min(shapes[0]) < 1:
        raise ContractViolation(f"invalid input shape {input_shape}", 0)
    for index, spec in enumerate(specs):
        shapes.append(output_shape(spec, shapes[-1], index))
    return shapes


def parameter_shapes(spec: LayerSpec, in_shape: Shape) -> Dict[str, Shape]:
    if spec.kind == "conv":
        return {"weight": (spec.out_channels, in_shape[0], spec.kernel, spec.kernel),
                "bias": (spec.out_channels,)}
    if spec.kind == "dense":
        return {"weight": (in_shape[0], spec.units), "bias": (spec.units,)}
    return {}


@dataclass
class ParamStore:
    """
    Per-layer weights/biases plus their RMSprop accumulators.
    """

    params: Params
    accumulators: Params
    seed: int

    @classmethod
    def initialize(cls, specs: Sequence[LayerSpec], input_shape: Shape, seed: int) -> "ParamStore":
        """
        Scaled uniform init in +-sqrt(6 / (fan_in + fan_out)), zero biases.
        """
        shapes = infer_shapes(specs, input_shape)
        params: Params = []
        for index, spec in enumerate(specs):
            entry = {}
            wanted = parameter_shapes(spec, shapes[index])
            if wanted:
                weight_shape = wanted["weight"]
                if spec.kind == "conv":
                    receptive = spec.kernel * spec.kernel
                    fan_in, fan_out = weight_shape[1] * receptive, weight_shape[0] * receptive
                else:
                    fan_in, fan_out = weight_shape
                limit = np.sqrt(6.0 / (fan_in + fan_out))
                rng = rng_for(seed, f"init:layer{index}")
                entry["weight"] = rng.uniform(-limit, limit, size=weight_shape).astype(np.float32)
                entry["bias"] = np.zeros(wanted["bias"], dtype=np.float32)
            params.append(entry)
        accumulators = [{name: np.zeros_like(a) for name, a in entry.items()} for entry in params]
        logger.debug(f"Initialized {sum(a.size for e in params for a in e.values())} parameters with seed {seed}")
        return cls(params=params, accumulators=accumulators, seed=seed)

    def copy(self) -> "ParamStore":
        return ParamStore(
            params=[{k: v.copy() for k, v in entry.items()} for entry in self.params],
            accumulators=[{k: v.copy() for k, v in entry.items()} for entry in self.accumulators],
            seed=self.seed,
        )

    def arrays(self) -> Iterator[np.ndarray]:
        """Parameter arrays in layer order, weight before bias."""
        for entry in self.params:
            for name in ("weight", "bias"):
                if name in entry:
                    yield entry[name]

    def parameter_count(self) -> int:
        return int(sum(a.size for a in self.arrays()))

    def astype(self, dtype) -> Params:
        return [{k: v.astype(dtype) for k, v in entry.items()} for entry in self.params]


class Sequential:
    """
    A fixed chain of layers over a known input shape (without batch).
    """

    def __init__(self, specs: Sequence[LayerSpec], input_shape: Shape):
        self.specs = list(specs)
        self.input_shape = tuple(input_shape)
        self.shapes = infer_shapes(self.specs, self.input_shape)

    @property
    def output_shape(self) -> Shape:
        return self.shapes[-1]

    def forward(self, params: Params, x: np.ndarray, stop: Optional[int] = None):
        """
        Run layers [0, stop) and return the output with per-layer caches.
        """
        if tuple(x.shape[1:]) != self.input_shape:
            raise ContractViolation(
                f"input shape {tuple(x.shape[1:])} does not match network input {self.input_shape}", 0
            )
        stop = len(self.specs) if stop is None else stop
        caches = []
        out = x
        for index, spec in enumerate(self.specs[:stop]):
            try:
                out, cache = self._forward_layer(index, spec, params[index], out)
            except ContractViolation as exc:
                if exc.layer_index is not None:
                    raise
                raise ContractViolation(exc.detail, index) from exc
            caches.append(cache)
            expected = self.shapes[index + 1]
            if tuple(out.shape[1:]) != expected:
                raise ContractViolation(f"produced {tuple(out.shape[1:])}, expected {expected}", index)
        return out, caches

    def backward(self, params: Params, caches: list, grad: np.ndarray, input_grad: bool = True):
        """
        Gradient w.r.t. the input and per-layer parameter gradients. With
        ``input_grad`` false the input gradient is skipped and returned as None.
        """
        grads: Params = [{} for _ in self.specs]
        for index in range(len(caches) - 1, -1, -1):
            grad, grads[index] = self._backward_layer(self.specs[index], params[index], caches[index], grad,
                                                      input_grad or index > 0)
        return grad, grads

    @staticmethod
    def _forward_layer(index: int, spec: LayerSpec, param: Dict[str, np.ndarray], x: np.ndarray):
        kind = spec.kind
        if kind == "conv":
            return layers.conv2d_forward(x, param["weight"].astype(x.dtype, copy=False),
                                         param["bias"].astype(x.dtype, copy=False), spec.stride)
        if kind == "dense":
            weight = param["weight"].astype(x.dtype, copy=False)
            return layers.dense_forward(x, weight, param["bias"].astype(x.dtype, copy=False)), (x, weight)
        if kind == "maxpool":
            return layers.maxpool2_forward(x)
        if kind == "upsample":
            return layers.upsample2_forward(x), None
        if kind == "flatten":
            return x.reshape(x.shape[0], -1), x.shape
        if kind == "reshape":
            return x.reshape((x.shape[0],) + tuple(spec.shape)), x.shape
        if kind == "crop":
            return layers.crop_forward(x, spec.shape[1], spec.shape[2]), x.shape
        if kind == "relu":
            return layers.relu_forward(x), x
        if kind == "sigmoid":
            out = layers.sigmoid_forward(x)
            return out, out
        raise ContractViolation(f"unknown layer kind {kind!r}", index)

    @staticmethod
    def _backward_layer(spec: LayerSpec, param: Dict[str, np.ndarray], cache, grad: np.ndarray,
                        input_grad: bool = True):
        kind = spec.kind
        if kind == "conv":
            grad_input, grad_weight, grad_bias = layers.conv2d_backward(grad, cache, input_grad)
            return grad_input, {"weight": grad_weight, "bias": grad_bias}
        if kind == "dense":
            x, weight = cache
            grad_input, grad_weight, grad_bias = layers.dense_backward(grad, x, weight, input_grad)
            return grad_input, {"weight": grad_weight, "bias": grad_bias}
        if kind == "maxpool":
            return layers.maxpool2_backward(grad, cache), {}
        if kind == "upsample":
            return layers.upsample2_backward(grad), {}
        if kind in ("flatten", "reshape"):
            return grad.reshape(cache), {}
        if kind == "crop":
            return layers.crop_backward(grad, cache), {}
        if kind == "relu":
            return layers.relu_backward(grad, cache), {}
        if kind == "sigmoid":
            return layers.sigmoid_backward(grad, cache), {}
        raise ContractViolation(f"unknown layer kind {kind!r}")
