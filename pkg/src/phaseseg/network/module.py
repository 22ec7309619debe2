"""Parameter containers."""

from collections import OrderedDict
from typing import Dict, Iterator, List, Mapping, Tuple

import numpy as np

from ..autodiff import Tensor
from ..utils.exceptions import DimensionError, FormatError


def uniform_init(rng: np.random.Generator, shape: Tuple[int, ...], fan_in: int, dtype: str) -> Tensor:
    """Trainable tensor drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in))."""
    bound = 1.0 / np.sqrt(fan_in)
    data = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return Tensor(data, requires_grad=True)


class Module:
    """Base class tracking parameters and sub-modules in assignment order.

    Assigning a trainable :class:`Tensor` or another :class:`Module` to an
    attribute registers it; ``named_parameters`` walks the registry
    depth-first, which fixes the checkpoint order.
    """

    def __init__(self):
        object.__setattr__(self, "_parameters", OrderedDict())
        object.__setattr__(self, "_modules", OrderedDict())

    def __setattr__(self, name, value):
        if isinstance(value, Module):
            self._modules[name] = value
        elif isinstance(value, Tensor) and value.requires_grad:
            self._parameters[name] = value
        object.__setattr__(self, name, value)

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)

    def forward(self, *args, **kwargs):
        raise NotImplementedError

    def named_parameters(self, prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for name, param in self._parameters.items():
            yield prefix + name, param
        for name, module in self._modules.items():
            yield from module.named_parameters(prefix + name + ".")

    def parameters(self) -> List[Tensor]:
        return [p for _, p in self.named_parameters()]

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def num_scalars(self) -> int:
        return int(sum(p.data.size for p in self.parameters()))

    def state_arrays(self) -> Dict[str, np.ndarray]:
        return OrderedDict((name, p.data) for name, p in self.named_parameters())

    def load_parameters(self, arrays: Mapping[str, np.ndarray]) -> None:
        """Replace parameter values by name; names and shapes must match exactly."""
        own = OrderedDict(self.named_parameters())
        missing = [n for n in own if n not in arrays]
        extra = [n for n in arrays if n not in own]
        if missing or extra:
            raise FormatError(
                f"Parameter names disagree (missing {missing[:3]}, unexpected {extra[:3]})",
                offset=0,
            )
        for name, param in own.items():
            value = np.asarray(arrays[name])
            if value.shape != param.shape:
                raise DimensionError(
                    f"Parameter {name} has shape {value.shape}, expected {param.shape}",
                    expected=param.shape,
                    actual=value.shape,
                )
            param.data = value.astype(param.dtype)


class ModuleList(Module):
    """Numbered sequence of sub-modules."""

    def __init__(self, modules=()):
        super().__init__()
        for module in modules:
            self.append(module)

    def append(self, module: Module) -> None:
        setattr(self, str(len(self._modules)), module)

    def __iter__(self):
        return iter(self._modules.values())

    def __len__(self) -> int:
        return len(self._modules)

    def __getitem__(self, index: int) -> Module:
        return list(self._modules.values())[index]
