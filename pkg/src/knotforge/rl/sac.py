"""Compact soft actor-critic on numpy: squashed-Gaussian actor, twin critics,
target networks, and auto-tuned entropy temperature.

Gradients are written out by hand (see the derivative comments inline); the
test suite checks every one of them against central finite differences.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import TrainingDiverged
from .nets import MLP, Adam

LOG_STD_MIN = -10.0
LOG_STD_MAX = 2.0
SQUASH_EPS = 1e-6
_MAGIC = b"KFSAC1\n"


@dataclass
class SacConfig:
    hidden: tuple[int, ...] = (256, 256)
    lr: float = 3e-4
    gamma: float = 0.99
    tau: float = 0.005
    batch_size: int = 256
    replay_capacity: int = 100_000
    target_entropy: float | None = None  # defaults to -act_dim
    dtype: str = "float32"  # float64 where gradients are probed numerically


class SacPolicy:
    """Squashed-Gaussian actor: obs -> (mu, log_std) -> a = tanh(u)."""

    def __init__(self, obs_dim: int, act_dim: int, hidden: tuple[int, ...],
                 rng: np.random.Generator, obs_scale: float = 1.0,
                 dtype=np.float64):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.hidden = tuple(hidden)
        self.obs_scale = obs_scale
        self.net = MLP([obs_dim, *hidden, 2 * act_dim], rng, dtype=dtype)

    def _heads(self, obs: np.ndarray, cache: bool = False):
        out = self.net.forward(obs, cache=cache)
        mu = out[:, :self.act_dim]
        raw_ls = out[:, self.act_dim:]
        ls = np.clip(raw_ls, LOG_STD_MIN, LOG_STD_MAX)
        mask = (raw_ls > LOG_STD_MIN) & (raw_ls < LOG_STD_MAX)
        return mu, ls, mask

    def sample(self, obs: np.ndarray, eps: np.ndarray, cache: bool = False):
        """Reparametrized sample a = tanh(mu + std * eps) with log-probability."""
        mu, ls, mask = self._heads(obs, cache=cache)
        std = np.exp(ls)
        u = mu + std * eps
        a = np.tanh(u)
        logp = (
            -0.5 * eps**2 - ls - 0.5 * np.log(2.0 * np.pi)
            - np.log(1.0 - a**2 + SQUASH_EPS)
        ).sum(axis=1)
        return a, logp, (mu, ls, mask, std, eps)

    def act(self, obs_vec: np.ndarray, rng: np.random.Generator | None = None,
            deterministic: bool = False) -> np.ndarray:
        obs = np.asarray(obs_vec, dtype=np.float64).reshape(1, -1)
        mu, ls, _ = self._heads(obs)
        if deterministic or rng is None:
            return np.tanh(mu[0])
        eps = rng.standard_normal(self.act_dim)
        return np.tanh(mu[0] + np.exp(ls[0]) * eps)

    def __call__(self, obs_vec: np.ndarray) -> np.ndarray:
        return self.act(obs_vec, deterministic=True)


class ReplayBuffer:
    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, act_dim))
        self.rew = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity)
        self.idx = 0
        self.full = False

    def __len__(self) -> int:
        return self.capacity if self.full else self.idx

    def add(self, obs, act, rew, next_obs, done) -> None:
        i = self.idx
        self.obs[i] = obs
        self.act[i] = act
        self.rew[i] = rew
        self.next_obs[i] = next_obs
        self.done[i] = float(done)
        self.idx = (i + 1) % self.capacity
        self.full = self.full or self.idx == 0

    def sample(self, batch_size: int, rng: np.random.Generator) -> dict:
        ids = rng.integers(0, len(self), size=batch_size)
        return {
            "obs": self.obs[ids], "act": self.act[ids], "rew": self.rew[ids],
            "next_obs": self.next_obs[ids], "done": self.done[ids],
        }


class SacLearner:
    def __init__(self, obs_dim: int, act_dim: int, cfg: SacConfig,
                 rng: np.random.Generator, obs_scale: float = 1.0):
        self.cfg = cfg
        self.act_dim = act_dim
        dtype = np.dtype(cfg.dtype)
        self.policy = SacPolicy(obs_dim, act_dim, cfg.hidden, rng, obs_scale,
                                dtype=dtype)
        sizes = [obs_dim + act_dim, *cfg.hidden, 1]
        self.q1 = MLP(sizes, rng, dtype=dtype)
        self.q2 = MLP(sizes, rng, dtype=dtype)
        self.q1_target = MLP(sizes, rng, dtype=dtype)
        self.q2_target = MLP(sizes, rng, dtype=dtype)
        self.q1_target.copy_from(self.q1)
        self.q2_target.copy_from(self.q2)
        self.log_alpha = np.zeros(1)
        self.target_entropy = (cfg.target_entropy
                               if cfg.target_entropy is not None else -float(act_dim))
        self.actor_opt = Adam(self.policy.net.tensors(), lr=cfg.lr)
        self.q1_opt = Adam(self.q1.tensors(), lr=cfg.lr)
        self.q2_opt = Adam(self.q2.tensors(), lr=cfg.lr)
        self.alpha_opt = Adam([self.log_alpha], lr=cfg.lr)
        self.buffer = ReplayBuffer(cfg.replay_capacity, obs_dim, act_dim)
        self.updates = 0

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha[0]))

    # -- loss pieces (exposed separately so finite differences can probe them)

    def critic_targets(self, batch: dict, eps_next: np.ndarray) -> np.ndarray:
        """y = r + gamma * (1 - done) * (min target Q(s', a') - alpha log pi(a'|s'))."""
        a_next, logp_next, _ = self.policy.sample(batch["next_obs"], eps_next)
        x = np.concatenate([batch["next_obs"], a_next], axis=1)
        q_min = np.minimum(self.q1_target.forward(x)[:, 0],
                           self.q2_target.forward(x)[:, 0])
        return batch["rew"] + self.cfg.gamma * (1.0 - batch["done"]) * (
            q_min - self.alpha * logp_next)

    def critic_loss(self, batch: dict, y: np.ndarray) -> float:
        x = np.concatenate([batch["obs"], batch["act"]], axis=1)
        e1 = self.q1.forward(x)[:, 0] - y
        e2 = self.q2.forward(x)[:, 0] - y
        return float(np.mean(e1**2) + np.mean(e2**2))

    def _critic_step(self, batch: dict, y: np.ndarray) -> float:
        x = np.concatenate([batch["obs"], batch["act"]], axis=1)
        n = len(y)
        loss = 0.0
        for q, opt in ((self.q1, self.q1_opt), (self.q2, self.q2_opt)):
            err = q.forward(x, cache=True)[:, 0] - y
            loss += float(np.mean(err**2))
            # d mean(err^2) / d q_out = 2 err / n
            w_g, b_g, _ = q.backward((2.0 * err / n)[:, None])
            opt.step([g for pair in zip(w_g, b_g) for g in pair])
        return loss

    def actor_loss(self, batch: dict, eps: np.ndarray) -> float:
        a, logp, _ = self.policy.sample(batch["obs"], eps)
        x = np.concatenate([batch["obs"], a], axis=1)
        q_min = np.minimum(self.q1.forward(x)[:, 0], self.q2.forward(x)[:, 0])
        return float(np.mean(self.alpha * logp - q_min))

    def _actor_step(self, batch: dict, eps: np.ndarray) -> tuple[float, np.ndarray]:
        obs = batch["obs"]
        n = len(obs)
        a, logp, (mu, ls, mask, std, eps) = self.policy.sample(obs, eps, cache=True)
        x = np.concatenate([obs, a], axis=1)
        q1 = self.q1.forward(x, cache=True)[:, 0]
        q2 = self.q2.forward(x, cache=True)[:, 0]
        use_q1 = q1 <= q2
        q_min = np.where(use_q1, q1, q2)
        loss = float(np.mean(self.alpha * logp - q_min))

        # dL/da: alpha * dlogp/da - dQmin/da, routed through the per-sample
        # argmin critic. dlogp/da_d = 2 a_d / (1 - a_d^2 + eps).
        _, _, gx1 = self.q1.backward(np.where(use_q1, -1.0 / n, 0.0)[:, None])
        _, _, gx2 = self.q2.backward(np.where(use_q1, 0.0, -1.0 / n)[:, None])
        dq_da = (gx1 + gx2)[:, obs.shape[1]:]
        dl_da = (self.alpha / n) * (2.0 * a / (1.0 - a**2 + SQUASH_EPS)) + dq_da

        # Chain rule through a = tanh(mu + std * eps):
        #   da/dmu = 1 - a^2;  da/dlog_std = (1 - a^2) * eps * std
        # plus the direct -log_std term of logp.
        one_m_a2 = 1.0 - a**2
        g_mu = dl_da * one_m_a2
        g_ls = dl_da * one_m_a2 * eps * std - (self.alpha / n)
        g_ls = g_ls * mask  # clipped log_std has zero gradient
        w_g, b_g, _ = self.policy.net.backward(np.concatenate([g_mu, g_ls], axis=1))
        self.actor_opt.step([g for pair in zip(w_g, b_g) for g in pair])
        return loss, logp

    def _alpha_step(self, logp: np.ndarray) -> None:
        # L(log_alpha) = -alpha * mean(logp + target_entropy), logp detached.
        grad = -self.alpha * float(np.mean(logp + self.target_entropy))
        self.alpha_opt.step([np.array([grad])])

    def update(self, batch: dict, rng: np.random.Generator) -> dict:
        """One gradient step on critics, actor, and temperature; soft-update targets."""
        n = len(batch["rew"])
        eps_next = rng.standard_normal((n, self.act_dim))
        eps = rng.standard_normal((n, self.act_dim))
        y = self.critic_targets(batch, eps_next)
        critic_loss = self._critic_step(batch, y)
        actor_loss, logp = self._actor_step(batch, eps)
        self._alpha_step(logp)
        if not (np.isfinite(critic_loss) and np.isfinite(actor_loss)
                and np.isfinite(self.log_alpha[0])):
            raise TrainingDiverged(
                f"non-finite loss at update {self.updates}: "
                f"critic={critic_loss} actor={actor_loss} log_alpha={self.log_alpha[0]}")
        self.q1_target.soft_update_from(self.q1, self.cfg.tau)
        self.q2_target.soft_update_from(self.q2, self.cfg.tau)
        self.updates += 1
        return {
            "critic_loss": critic_loss,
            "actor_loss": actor_loss,
            "alpha": self.alpha,
            "entropy": float(-np.mean(logp)),
        }


# ---------------------------------------------------------------------------
# Checkpoints: JSON header + concatenated little-endian float64 tensors.


def save_policy(policy: SacPolicy, path: str | Path, variant: str | None = None,
                kind: str | None = None, phi: int | None = None,
                extra: dict | None = None) -> None:
    tensors = policy.net.tensors()
    header = {
        "format": "sacpol-v1",
        "obs_dim": policy.obs_dim,
        "act_dim": policy.act_dim,
        "hidden": list(policy.hidden),
        "obs_scale": policy.obs_scale,
        "shapes": [list(t.shape) for t in tensors],
        "variant": variant,
        "kind": kind,
        "phi": phi,
    }
    if extra:
        header.update(extra)
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for t in tensors:
            fh.write(np.ascontiguousarray(t, dtype="<f8").tobytes())


def load_policy(path: str | Path) -> tuple[SacPolicy, dict]:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise ValueError(f"{path}: not a policy checkpoint")
        (hlen,) = struct.unpack("<I", fh.read(4))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        policy = SacPolicy(header["obs_dim"], header["act_dim"],
                           tuple(header["hidden"]), np.random.default_rng(0),
                           obs_scale=header.get("obs_scale", 1.0))
        for t, shape in zip(policy.net.tensors(), header["shapes"]):
            raw = fh.read(8 * int(np.prod(shape)))
            t[...] = np.frombuffer(raw, dtype="<f8").reshape(shape)
    return policy, header
