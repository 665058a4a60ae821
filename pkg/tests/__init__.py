"""Unit test package for jetfdi."""
