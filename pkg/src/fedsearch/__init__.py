"""Personalized federated search: vertical retrieval, intent inference,
a click-trained federated scorer, aggregation, and an A/B simulator."""

__version__ = "0.1.0"
