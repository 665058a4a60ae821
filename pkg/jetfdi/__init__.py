"""Top-level package for jetfdi."""

__author__ = """jetfdi developers"""
__version__ = "0.1.0"
