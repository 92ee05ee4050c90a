"""
Tests unitaires.
"""
