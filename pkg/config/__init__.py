"""
Module de configuration des expériences.
"""
