"""ppgpt: retrieval-augmented property generation and formal verification
for smart contracts written in a checked Solidity subset."""

__version__ = "0.1.0"
