"""
Command modules; each exposes register(subparsers, common)
"""
from cli.commands import (
    automaton,
    check,
    config,
    member,
    presets,
    sample,
    stallings,
    sweep,
    transition,
    words,
)

COMMANDS = [words, automaton, check, sample, sweep, transition, stallings, member, presets, config]
