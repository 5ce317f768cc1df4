"""Reverse-mode automatic differentiation on 64-bit numpy arrays.

The engine is deliberately small: values live in :class:`Tensor`, and while a
:class:`ComputationRecord` is active every operation appends a node to it.
``grad`` walks the record backwards, building vector-Jacobian products out of
the same differentiable operations, so a record opened with
``higher_order=True`` can differentiate through its own gradients (needed for
the interpolate-gradient norm penalty in the critic loss).
"""

from __future__ import annotations

import itertools
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np


class RecordError(RuntimeError):
    """Raised on misuse of computation records (nesting, missing capability)."""


class GradientError(RuntimeError):
    """Raised when a gradient query is malformed or unsatisfiable."""


@dataclass(frozen=True)
class OpEntry:
    """One executed operation: name plus the node ids it connects."""

    op: str
    input_ids: tuple[int, ...]
    output_id: int


class Node:
    """Creator bookkeeping for one tensor inside a record."""

    __slots__ = ("record", "uid", "op", "parents", "vjp")

    def __init__(self, record, uid, op, parents, vjp):
        self.record: ComputationRecord = record
        self.uid: int = uid
        self.op: str = op
        self.parents: tuple[Tensor, ...] = parents
        # vjp(upstream, needed) -> per-parent contributions (Tensor or None,
        # aligned with parents; entries with needed[i] False may be skipped);
        # None for leaves.
        self.vjp: Optional[Callable[["Tensor", tuple], Sequence[Optional["Tensor"]]]] = vjp


class ComputationRecord:
    """Append-only log of executed operations.

    Node ids are assigned in execution order, so ascending uid is a valid
    topological order. ``higher_order`` marks whether gradient queries against
    this record may themselves be recorded (and differentiated again).
    """

    def __init__(self, higher_order: bool = False):
        self.higher_order = higher_order
        self.ops: list[OpEntry] = []
        self._ids = itertools.count()

    def next_id(self) -> int:
        return next(self._ids)

    def __len__(self) -> int:
        return len(self.ops)


_ACTIVE: Optional[ComputationRecord] = None


def active_record() -> Optional[ComputationRecord]:
    return _ACTIVE


@contextmanager
def record(higher_order: bool = False):
    """Open a computation record. Records do not nest."""
    global _ACTIVE
    if _ACTIVE is not None:
        raise RecordError("a computation record is already active; records do not nest")
    rec = ComputationRecord(higher_order=higher_order)
    _ACTIVE = rec
    try:
        yield rec
    finally:
        _ACTIVE = None


@contextmanager
def _use_record(rec: Optional[ComputationRecord]):
    """Temporarily swap the active record (grad internals only)."""
    global _ACTIVE
    prev = _ACTIVE
    _ACTIVE = rec
    try:
        yield
    finally:
        _ACTIVE = prev


@contextmanager
def no_record():
    """Run a block without recording, e.g. sampling fakes for a critic step."""
    with _use_record(None):
        yield


class Tensor:
    """An n-dimensional array of float64, optionally attached to a record.

    A tensor detached from any record has ``node is None``; gradient queries
    on it raise :class:`GradientError`. ``requires_grad=False`` marks a
    constant: it is never attached, so backward passes skip it entirely.
    """

    __slots__ = ("data", "node", "requires_grad")

    def __init__(self, data, node: Optional[Node] = None, requires_grad: bool = True):
        self.data = np.asarray(data, dtype=np.float64)
        self.node = node
        self.requires_grad = requires_grad

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def numpy(self) -> np.ndarray:
        return self.data

    def __repr__(self) -> str:
        attached = "" if self.node is None else f", node={self.node.uid}"
        return f"Tensor(shape={self.shape}{attached})\n{self.data}"

    # Arithmetic operators are wired up by eegwgan.autodiff.functional at
    # import time so the op implementations live in one module.


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _attach(t: Tensor) -> Tensor:
    """Ensure ``t`` is a node of the active record, attaching it as a leaf.

    Constants (``requires_grad=False``) stay unattached. Tensors carrying
    nodes from an earlier, no-longer-active record are re-attached as fresh
    leaves (model parameters live across many records).
    """
    rec = _ACTIVE
    if rec is None or not t.requires_grad:
        return t
    if t.node is not None and t.node.record is rec:
        return t
    uid = rec.next_id()
    t.node = Node(rec, uid, "leaf", (), None)
    rec.ops.append(OpEntry("leaf", (), uid))
    return t


def apply_op(op: str, out_data: np.ndarray, inputs: tuple[Tensor, ...], make_vjp) -> Tensor:
    """Create the output tensor for an executed op, recording it if active.

    ``make_vjp`` is only invoked while recording; it must return a callable
    mapping the upstream gradient to per-input contributions built from
    differentiable ops (that is what makes grad-of-grad work). An op whose
    inputs are all constants produces a constant.
    """
    rec = _ACTIVE
    if rec is None:
        return Tensor(out_data)
    parents = tuple(_attach(t) for t in inputs)
    if not any(p.node is not None and p.node.record is rec for p in parents):
        return Tensor(out_data)
    uid = rec.next_id()
    node = Node(rec, uid, op, parents, make_vjp())
    rec.ops.append(OpEntry(
        op,
        tuple(p.node.uid if (p.node is not None and p.node.record is rec) else -1 for p in parents),
        uid,
    ))
    return Tensor(out_data, node)


def grad(objective: Tensor, wrt: Sequence[Tensor], create_higher_order: bool = False,
         allow_unreachable: bool = False) -> list[Tensor]:
    """Differentiate a scalar objective with respect to ``wrt`` tensors.

    With ``create_higher_order=True`` (record must have been opened with
    ``higher_order=True``) the returned gradients are nodes in the same
    record and can be differentiated again. ``allow_unreachable`` returns a
    zero tensor for a ``wrt`` entry the objective does not depend on (e.g. a
    bias that cancels out of an input-gradient penalty) instead of raising.
    """
    if objective.node is None:
        raise GradientError("objective is not attached to a computation record")
    if objective.size != 1:
        raise GradientError(f"objective must be scalar, got shape {objective.shape}")
    rec = objective.node.record
    if create_higher_order and not rec.higher_order:
        raise RecordError("record was not opened with higher_order=True")
    wrt = list(wrt)
    for i, t in enumerate(wrt):
        if t.node is None or t.node.record is not rec:
            raise GradientError(f"wrt[{i}] is not attached to the objective's record")

    # Nodes that can influence some wrt tensor: ascending op order is a
    # forward topological sweep, so one pass suffices.
    required: set[int] = {t.node.uid for t in wrt}
    for entry in rec.ops:
        if entry.output_id not in required and any(i in required for i in entry.input_ids):
            required.add(entry.output_id)

    # Ancestor sub-DAG of the objective; descending uid is reverse topological
    # order because ids are assigned in execution order.
    order: list[Node] = []
    seen: set[int] = set()
    stack = [objective.node]
    while stack:
        n = stack.pop()
        if n.uid in seen:
            continue
        seen.add(n.uid)
        order.append(n)
        for p in n.parents:
            if p.node is not None and p.node.record is rec and p.node.uid not in seen:
                stack.append(p.node)
    order.sort(key=lambda n: n.uid, reverse=True)

    from .functional import add  # deferred: functional imports this module

    grads: dict[int, Tensor] = {}
    with _use_record(rec if create_higher_order else None):
        grads[objective.node.uid] = Tensor(np.ones_like(objective.data))
        for n in order:
            g = grads.get(n.uid)
            if g is None or n.vjp is None:
                continue
            needed = tuple(
                p.node is not None and p.node.record is rec and p.node.uid in required
                for p in n.parents
            )
            if not any(needed):
                continue
            for parent, want, contrib in zip(n.parents, needed, n.vjp(g, needed)):
                if not want or contrib is None:
                    continue
                uid = parent.node.uid
                prev = grads.get(uid)
                grads[uid] = contrib if prev is None else add(prev, contrib)

    results = []
    for i, t in enumerate(wrt):
        g = grads.get(t.node.uid)
        if g is None:
            if not allow_unreachable:
                raise GradientError(f"wrt[{i}] is not reachable from the objective")
            g = Tensor(np.zeros_like(t.data))
        results.append(g)
    return results
