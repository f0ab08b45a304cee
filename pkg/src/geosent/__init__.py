"""Country tagging, sentiment scoring and weekly trend analysis for short social-media texts."""

__version__ = "0.1.0"
