"""Discovery and measurement of reflected search poisoning."""

__version__ = "0.1.0"
