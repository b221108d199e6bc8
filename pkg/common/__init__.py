"""
Common utilities and helpers shared across all apps
"""

