"""Neural decoders for topological stabilizer codes trained on diagnosis labels."""

__version__ = "0.1.0"
