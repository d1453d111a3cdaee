"""
Command Registration Module

Each submodule provides a registration function that takes the argparse
subparsers action and adds one command with its flags, its parameter
resolver and its executor.
"""

from .common import CommandResult, RunConfig
from .invariance import register_invariance_command
from .lemma import register_lemma_command
from .omt import register_omt_command
from .uniformity import register_uniformity_command

COMMANDS = ("lemma", "uniformity", "invariance", "omt")

__all__ = [
    "COMMANDS",
    "CommandResult",
    "RunConfig",
    "register_invariance_command",
    "register_lemma_command",
    "register_omt_command",
    "register_uniformity_command",
]
