"""
Active-RBSE typing simulator.

Simulates an ERP-based typing interface: a character n-gram language model
supplies the prior for each character, simulated EEG evidence is fused by
recursive Bayesian updates, and each sequence of flashes is chosen by a
greedy query policy or by a standard presentation paradigm. A Monte-Carlo
study compares the policies on typing duration and phrase completion.
"""

__version__ = "0.1.0"
