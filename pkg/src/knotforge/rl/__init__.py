"""Goal-conditioned skill learning: reward, episodes, pools, SAC, registry."""

from .episodes import EpisodeConfig, EpisodeTrace, decode_action, encode_observation, run_episode
from .goals import TransitionGoal, encode_goal, reward
from .pools import ConfigPool, harvest, select_goal_and_start
from .registry import AgentKey, AgentRegistry, registry_lookup
from .sac import SacLearner, SacPolicy, load_policy, save_policy
from .train import TrainConfig, evaluate_policy, random_policy, train

__all__ = [
    "AgentKey", "AgentRegistry", "ConfigPool", "EpisodeConfig", "EpisodeTrace",
    "SacLearner", "SacPolicy", "TrainConfig", "TransitionGoal", "decode_action",
    "encode_goal", "encode_observation", "evaluate_policy", "harvest",
    "load_policy", "random_policy", "registry_lookup", "reward", "run_episode",
    "save_policy", "select_goal_and_start", "train",
]
