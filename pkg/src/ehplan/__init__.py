"""Risk-averse two-stage capacity planning for multi-carrier energy hubs."""

__version__ = "0.1.0"
