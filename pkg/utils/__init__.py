"""
Module d'utilitaires (fichiers, solveur, erreurs).
"""
