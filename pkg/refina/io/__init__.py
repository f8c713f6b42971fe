from .base import load, dump, read_pairs
