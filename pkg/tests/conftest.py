import numpy as np
import pytest

from hgx.hypergraph import build_hypergraph
from hgx.linalg import Rng
from hgx.nn import cross_entropy_masked, replay_forward
from hgx.verify import random_connected_hypergraph


def regularized_loss(params, p, x, labels, mask, config, tape):
    """Training objective replayed on fixed dropout masks: CE + L2 term."""
    logits = replay_forward(params, p, x, config, tape)
    loss, _ = cross_entropy_masked(logits, labels, mask)
    reg = 0.5 * config.weight_decay * sum(
        float(np.sum(t * t)) for _, t in params.tensors()
    )
    return loss + reg


def gradient_check_worst(params, p, x, labels, mask, config, tape, grads, h=1e-5):
    """Worst relative error of analytic grads vs central finite differences."""
    worst = 0.0
    for name, tensor in params.tensors():
        fd = np.zeros_like(tensor)
        it = np.nditer(tensor, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = tensor[idx]
            tensor[idx] = orig + h
            up = regularized_loss(params, p, x, labels, mask, config, tape)
            tensor[idx] = orig - h
            down = regularized_loss(params, p, x, labels, mask, config, tape)
            tensor[idx] = orig
            fd[idx] = (up - down) / (2 * h)
        scale = max(float(np.max(np.abs(fd))), 1e-8)
        worst = max(worst, float(np.max(np.abs(grads[name] - fd))) / scale)
    return worst


@pytest.fixture
def chain():
    """Three nodes joined by two overlapping pair-edges; degrees [1, 2, 1]."""
    return build_hypergraph(3, [[0, 1], [1, 2]])


@pytest.fixture
def singleton():
    return build_hypergraph(1, [[0]])


@pytest.fixture
def graph_factory():
    """Seeded factory for random connected hypergraphs."""

    def make(seed, **kwargs):
        return random_connected_hypergraph(Rng(seed).stream("graphs"), **kwargs)

    return make


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240817)
