"""Belief-function inference in evidential networks with conditional belief functions."""
